#pragma once

// Two-sample statistics used as cluster distances: the unbiased squared MMD
// with an RBF kernel, its permutation p-value, univariate KS / Anderson-Darling,
// and the context-free set dissimilarities (overlap, Jaccard).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>

#include "hqc/data_model.hpp"

namespace hqc {

enum class GammaMode { fixed, unit_variance_default, median_heuristic };

/// RBF bandwidth. `gamma` is always resolved (positive, finite) once a config
/// exists; median_heuristic configs are produced by resolve_median_gamma.
struct KernelConfig {
  double gamma = 0.5;
  GammaMode gamma_mode = GammaMode::unit_variance_default;

  static KernelConfig fixed(double gamma);
  /// gamma = 1/(2 sigma^2) with sigma = 1, the value for standardized data.
  static KernelConfig unit_variance_default();
};

/// gamma = 1 / (2 * median^2) of pairwise Euclidean distances among up to
/// `max_points` rows drawn from `rows` with `seed`.
KernelConfig resolve_median_gamma(const Dataset& dataset, std::span<const std::size_t> rows,
                                  std::uint64_t seed, std::size_t max_points = 1000);

struct TwoSampleResult {
  double statistic = 0.0;      // sqrt(max(raw_statistic, 0))
  double raw_statistic = 0.0;  // unbiased squared MMD, may be negative
  std::optional<double> p_value;
  std::size_t n = 0;
  std::size_t m = 0;
};

double rbf_kernel(std::span<const double> x, std::span<const double> y, const KernelConfig& config);

/// Normalized within-sample term 2/(n(n-1)) * sum_{i<j} k(x_i, x_j). Needs n >= 2.
double within_kernel_mean(const Sample& s, const KernelConfig& config);

/// Normalized cross term 2/(nm) * sum_{i,j} k(x_i, y_j), summed in an order
/// that does not depend on which sample is passed first.
double cross_kernel_mean(const Sample& p, const Sample& q, const KernelConfig& config);

/// Final assembly of the estimator from its three terms. Callers that cache
/// within-terms must use this to stay bit-identical with mmd2_unbiased.
inline double combine_mmd2(double within_p, double within_q, double cross) {
  return (within_p + within_q) - cross;
}

inline double clamp_distance(double raw_mmd2) { return raw_mmd2 > 0.0 ? std::sqrt(raw_mmd2) : 0.0; }

double mmd2_unbiased(const Sample& p, const Sample& q, const KernelConfig& config);

TwoSampleResult mmd_distance(const Sample& p, const Sample& q, const KernelConfig& config);

/// Permutation p-value (1 + #{resampled >= observed}) / (b + 1).
double bootstrap_pvalue(const Sample& p, const Sample& q, const KernelConfig& config,
                        std::size_t b, std::uint64_t seed);

/// sqrt(nm/(n+m)) * sup |F_P - F_Q|.
double ks_statistic(std::span<const double> p, std::span<const double> q);

/// Two-sample Anderson-Darling distance (Pettitt form), evaluated as a sum over
/// pooled order statistics with right-continuous empirical CDFs, skipping the
/// points where the pooled CDF reaches 1. Ties are handled by evaluating the
/// CDFs at the tied value, so the result equals the integral over the pooled
/// empirical measure.
double ad_statistic(std::span<const double> p, std::span<const double> q);

/// Number of worker threads used for large kernel sums (default: hardware concurrency).
void set_thread_count(unsigned threads);
unsigned thread_count();

namespace detail {
template <typename T>
std::size_t intersection_size(const std::set<T>& a, const std::set<T>& b) {
  std::size_t k = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++k;
      ++ia;
      ++ib;
    }
  }
  return k;
}
}  // namespace detail

/// 1 - |a ∩ b| / min(|a|, |b|).
template <typename T>
double overlap_dissimilarity(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("overlap dissimilarity of an empty set");
  const double inter = static_cast<double>(detail::intersection_size(a, b));
  return 1.0 - inter / static_cast<double>(std::min(a.size(), b.size()));
}

/// 1 - |a ∩ b| / |a ∪ b|.
template <typename T>
double jaccard_distance(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) throw std::invalid_argument("Jaccard distance of two empty sets");
  const std::size_t inter = detail::intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace hqc
