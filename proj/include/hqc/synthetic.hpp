#pragma once

// Seeded Gaussian mixed-type datasets: one qualitative label per group and
// independent normal features around a per-group mean.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hqc/data_model.hpp"

namespace hqc::synthetic {

struct GroupSpec {
  std::string label;
  std::size_t rows = 0;
  std::vector<double> mean;  // one entry per feature
  double sd = 1.0;
};

std::vector<std::string> default_feature_names(std::size_t features);

/// Raw (unstandardized) dataset, rows grouped in spec order.
Dataset make_dataset(const std::vector<GroupSpec>& groups, std::uint64_t seed,
                     std::vector<std::string> feature_names = {});

/// CSV text with a `label` column followed by the feature columns.
std::string make_csv(const std::vector<GroupSpec>& groups, std::uint64_t seed,
                     std::vector<std::string> feature_names = {});

std::string to_csv(const Dataset& dataset);

/// `groups` groups with sizes spread around total_rows / groups (at least 2
/// rows each, summing to total_rows) and means drawn from N(0, 0.5^2).
std::vector<GroupSpec> benchmark_groups(std::size_t groups, std::size_t total_rows, std::size_t features,
                                        std::uint64_t seed);

}  // namespace hqc::synthetic
