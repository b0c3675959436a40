#include "hqc/statdist.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "hqc/error.hpp"
#include "hqc/random.hpp"

namespace hqc {

namespace {

std::atomic<unsigned> g_threads{std::max(1u, std::thread::hardware_concurrency())};

// Below this many kernel evaluations a call stays on the calling thread.
constexpr std::size_t kParallelWork = std::size_t{1} << 16;

inline double squared_distance(const double* a, const double* b, std::size_t dims) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

inline double kernel(const double* a, const double* b, std::size_t dims, double gamma) {
  return std::exp(-gamma * squared_distance(a, b, dims));
}

// Fills partial[i] = row_fn(i) for every row, possibly on several threads,
// then reduces in row order so the result is independent of the thread count.
template <typename Partial, typename RowFn>
Partial reduce_rows(std::size_t rows, std::size_t work, RowFn row_fn) {
  std::vector<Partial> partial(rows);
  const unsigned threads = std::min<std::size_t>(g_threads.load(), rows);
  if (threads <= 1 || work < kParallelWork) {
    for (std::size_t i = 0; i < rows; ++i) partial[i] = row_fn(i);
  } else {
    // Interleaved assignment balances the triangular within-sample loops.
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < rows; i += threads) partial[i] = row_fn(i);
      });
    }
  }
  Partial total{};
  for (const auto& p : partial) {
    if constexpr (std::is_arithmetic_v<Partial>) {
      total += p;
    } else {
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += p[k];
    }
  }
  return total;
}

void check_dims(const Sample& p, const Sample& q) {
  if (p.dims() != q.dims()) {
    throw std::invalid_argument("sample dimension mismatch: " + std::to_string(p.dims()) +
                                " vs " + std::to_string(q.dims()));
  }
}

void check_size(const Sample& s, const char* which) {
  if (s.n() < 2) {
    throw DataError(std::string("sample ") + which + " has " + std::to_string(s.n()) +
                    " rows; the unbiased MMD estimator needs at least 2");
  }
}

// Orientation used for the cross term: smaller sample first, then
// lexicographic on the row data.
bool canonical_first(const Sample& p, const Sample& q) {
  if (p.n() != q.n()) return p.n() < q.n();
  const auto size = static_cast<std::ptrdiff_t>(p.rows.size());
  return !std::lexicographical_compare(q.rows.data(), q.rows.data() + size, p.rows.data(),
                                       p.rows.data() + size);
}

double checked_gamma(const KernelConfig& config) {
  if (!(config.gamma > 0.0) || !std::isfinite(config.gamma)) {
    throw std::invalid_argument("kernel gamma must be positive and finite");
  }
  return config.gamma;
}

}  // namespace

void set_thread_count(unsigned threads) { g_threads.store(std::max(1u, threads)); }
unsigned thread_count() { return g_threads.load(); }

KernelConfig KernelConfig::fixed(double gamma) {
  KernelConfig c{gamma, GammaMode::fixed};
  checked_gamma(c);
  return c;
}

KernelConfig KernelConfig::unit_variance_default() { return {0.5, GammaMode::unit_variance_default}; }

KernelConfig resolve_median_gamma(const Dataset& dataset, std::span<const std::size_t> rows,
                                  std::uint64_t seed, std::size_t max_points) {
  const Sample s = draw_sample(dataset, rows, max_points, rng::derive_seed(seed, 0x6d656469616eULL));
  if (s.n() < 2) throw DataError("median heuristic needs at least 2 rows");
  std::vector<double> dists;
  dists.reserve(s.n() * (s.n() - 1) / 2);
  for (std::size_t i = 0; i < s.n(); ++i) {
    for (std::size_t j = i + 1; j < s.n(); ++j) {
      dists.push_back(std::sqrt(squared_distance(s.row(i).data(), s.row(j).data(), s.dims())));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0)) throw DataError("median pairwise distance is zero; cannot set gamma");
  return {1.0 / (2.0 * median * median), GammaMode::median_heuristic};
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, const KernelConfig& config) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel arguments differ in dimension");
  return kernel(x.data(), y.data(), x.size(), checked_gamma(config));
}

double within_kernel_mean(const Sample& s, const KernelConfig& config) {
  check_size(s, "P");
  const double gamma = checked_gamma(config);
  const std::size_t n = s.n();
  const std::size_t dims = s.dims();
  const double* data = s.rows.data();
  const double sum = reduce_rows<double>(n, n * n / 2, [&](std::size_t i) {
    double acc = 0.0;
    const double* xi = data + i * dims;
    for (std::size_t j = i + 1; j < n; ++j) acc += kernel(xi, data + j * dims, dims, gamma);
    return acc;
  });
  return (2.0 * sum) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double cross_kernel_mean(const Sample& p, const Sample& q, const KernelConfig& config) {
  check_dims(p, q);
  const double gamma = checked_gamma(config);
  const Sample& a = canonical_first(p, q) ? p : q;
  const Sample& b = (&a == &p) ? q : p;
  const std::size_t n = a.n();
  const std::size_t m = b.n();
  const std::size_t dims = a.dims();
  const double sum = reduce_rows<double>(n, n * m, [&](std::size_t i) {
    double acc = 0.0;
    const double* xi = a.rows.data() + i * dims;
    for (std::size_t j = 0; j < m; ++j) acc += kernel(xi, b.rows.data() + j * dims, dims, gamma);
    return acc;
  });
  return (2.0 * sum) / (static_cast<double>(n) * static_cast<double>(m));
}

double mmd2_unbiased(const Sample& p, const Sample& q, const KernelConfig& config) {
  check_dims(p, q);
  check_size(p, "P");
  check_size(q, "Q");
  return combine_mmd2(within_kernel_mean(p, config), within_kernel_mean(q, config),
                      cross_kernel_mean(p, q, config));
}

TwoSampleResult mmd_distance(const Sample& p, const Sample& q, const KernelConfig& config) {
  TwoSampleResult r;
  r.raw_statistic = mmd2_unbiased(p, q, config);
  r.statistic = clamp_distance(r.raw_statistic);
  r.n = p.n();
  r.m = q.n();
  return r;
}

namespace {

// Pooled-sample view used by the permutation test. Kernel values come from a
// cached matrix when it fits, otherwise they are recomputed per resample.
class PooledKernel {
 public:
  static constexpr std::size_t kMaxCached = 4096;

  PooledKernel(const Sample& p, const Sample& q, double gamma)
      : dims_(p.dims()), gamma_(gamma), pooled_(p.n() + q.n(), p.dims()) {
    pooled_.topRows(static_cast<Eigen::Index>(p.n())) = p.rows;
    pooled_.bottomRows(static_cast<Eigen::Index>(q.n())) = q.rows;
    const std::size_t total = size();
    if (total <= kMaxCached) {
      cache_.resize(total * total);
      for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t j = i + 1; j < total; ++j) {
          const double k = eval(i, j);
          cache_[i * total + j] = k;
          cache_[j * total + i] = k;
        }
      }
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(pooled_.rows()); }

  /// Unbiased MMD^2 when rows with in_x[i] == 1 form the first sample.
  double statistic(const std::vector<unsigned char>& in_x, std::size_t n, std::size_t m) const {
    const std::size_t total = size();
    const auto sums = reduce_rows<std::array<double, 3>>(total, total * total / 2, [&](std::size_t i) {
      std::array<double, 3> acc{0.0, 0.0, 0.0};  // xx, yy, xy
      for (std::size_t j = i + 1; j < total; ++j) {
        const double k = cache_.empty() ? eval(i, j) : cache_[i * total + j];
        if (in_x[i] && in_x[j]) {
          acc[0] += k;
        } else if (!in_x[i] && !in_x[j]) {
          acc[1] += k;
        } else {
          acc[2] += k;
        }
      }
      return acc;
    });
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return combine_mmd2((2.0 * sums[0]) / (dn * (dn - 1.0)), (2.0 * sums[1]) / (dm * (dm - 1.0)),
                        (2.0 * sums[2]) / (dn * dm));
  }

 private:
  double eval(std::size_t i, std::size_t j) const {
    return kernel(pooled_.row(static_cast<Eigen::Index>(i)).data(),
                  pooled_.row(static_cast<Eigen::Index>(j)).data(), dims_, gamma_);
  }

  std::size_t dims_;
  double gamma_;
  RowMatrix pooled_;
  std::vector<double> cache_;
};

}  // namespace

double bootstrap_pvalue(const Sample& p, const Sample& q, const KernelConfig& config,
                        std::size_t b, std::uint64_t seed) {
  if (b < 1) throw std::invalid_argument("bootstrap resample count must be at least 1");
  check_dims(p, q);
  check_size(p, "P");
  check_size(q, "Q");
  const PooledKernel pooled(p, q, checked_gamma(config));
  const std::size_t n = p.n();
  const std::size_t m = q.n();

  std::vector<unsigned char> labels(n + m, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n), 1);
  const double observed = pooled.statistic(labels, n, m);

  std::mt19937_64 gen(seed);
  std::size_t at_least = 0;
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t i = labels.size() - 1; i > 0; --i) {
      std::swap(labels[i], labels[rng::uniform_below(gen, i + 1)]);
    }
    if (pooled.statistic(labels, n, m) >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(b + 1);
}

double ks_statistic(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || q.empty()) throw std::invalid_argument("KS statistic of an empty sample");
  std::vector<double> a(p.begin(), p.end());
  std::vector<double> b(q.begin(), q.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i == a.size()) {
      v = b[j];
    } else if (j == b.size()) {
      v = a[i];
    } else {
      v = std::min(a[i], b[j]);
    }
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return std::sqrt((n * m) / (n + m)) * sup;
}

double ad_statistic(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || q.empty()) throw std::invalid_argument("AD statistic of an empty sample");
  std::vector<double> a(p.begin(), p.end());
  std::vector<double> b(q.begin(), q.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (std::min(a.front(), b.front()) == std::max(a.back(), b.back())) {
    throw DataError("AD statistic undefined: all pooled values are identical");
  }
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t total = n + m;
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double dtotal = static_cast<double>(total);

  // Walk the pooled order statistics run by run; every point in a tie run
  // sees the CDFs evaluated at the run's value.
  std::size_t i = 0;
  std::size_t j = 0;
  double sum = 0.0;
  while (i + j < total) {
    double v;
    if (i == n) {
      v = b[j];
    } else if (j == m) {
      v = a[i];
    } else {
      v = std::min(a[i], b[j]);
    }
    const std::size_t start = i + j;
    while (i < n && a[i] == v) ++i;
    while (j < m && b[j] == v) ++j;
    const std::size_t below = i + j;
    if (below == total) break;
    const double h = static_cast<double>(below) / dtotal;
    const double diff = static_cast<double>(i) / dn - static_cast<double>(j) / dm;
    const double term = diff * diff / (h * (1.0 - h));
    for (std::size_t k = start; k < below; ++k) sum += term;
  }
  return (dn * dm / dtotal) * (sum / dtotal);
}

}  // namespace hqc
