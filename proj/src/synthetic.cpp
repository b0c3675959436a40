#include "hqc/synthetic.hpp"

#include <random>
#include <stdexcept>

#include "hqc/csv.hpp"
#include "hqc/io.hpp"
#include "hqc/random.hpp"

namespace hqc::synthetic {

std::vector<std::string> default_feature_names(std::size_t features) {
  std::vector<std::string> names;
  for (std::size_t f = 0; f < features; ++f) names.push_back("x" + std::to_string(f));
  return names;
}

Dataset make_dataset(const std::vector<GroupSpec>& groups, std::uint64_t seed,
                     std::vector<std::string> feature_names) {
  if (groups.empty()) throw std::invalid_argument("no synthetic groups");
  const std::size_t dims = groups.front().mean.size();
  if (feature_names.empty()) feature_names = default_feature_names(dims);
  if (feature_names.size() != dims) throw std::invalid_argument("feature name count mismatch");

  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.mean.size() != dims) throw std::invalid_argument("group means differ in dimension");
    total += g.rows;
  }
  Dataset ds;
  ds.label_name = "label";
  ds.column_names = std::move(feature_names);
  ds.quantitative.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dims));
  ds.qualitative.reserve(total);

  Eigen::Index row = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    std::mt19937_64 gen(rng::derive_seed(seed, gi));
    for (std::size_t r = 0; r < g.rows; ++r, ++row) {
      for (std::size_t d = 0; d < dims; ++d) {
        ds.quantitative(row, static_cast<Eigen::Index>(d)) = g.mean[d] + g.sd * rng::standard_normal(gen);
      }
      ds.qualitative.push_back(g.label);
    }
  }
  return ds;
}

std::string to_csv(const Dataset& dataset) {
  std::vector<std::string> fields{dataset.label_name};
  fields.insert(fields.end(), dataset.column_names.begin(), dataset.column_names.end());
  std::string out = csv::join(fields) + "\n";
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    fields.assign({dataset.qualitative[i]});
    for (std::size_t d = 0; d < dataset.dims(); ++d) {
      fields.push_back(io::format_g(
          dataset.quantitative(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)), 17));
    }
    out += csv::join(fields) + "\n";
  }
  return out;
}

std::string make_csv(const std::vector<GroupSpec>& groups, std::uint64_t seed,
                     std::vector<std::string> feature_names) {
  return to_csv(make_dataset(groups, seed, std::move(feature_names)));
}

std::vector<GroupSpec> benchmark_groups(std::size_t groups, std::size_t total_rows, std::size_t features,
                                        std::uint64_t seed) {
  if (groups < 2 || total_rows < 2 * groups) throw std::invalid_argument("benchmark needs >= 2 rows per group");
  std::mt19937_64 gen(seed);
  // Relative weights in [0.5, 1.5) give sizes within roughly 3x of each other.
  std::vector<double> weight(groups);
  double wsum = 0.0;
  for (auto& w : weight) wsum += (w = 0.5 + rng::uniform01(gen));
  std::vector<GroupSpec> out(groups);
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    auto& spec = out[g];
    char name[32];
    std::snprintf(name, sizeof name, "group_%02zu", g);
    spec.label = name;
    spec.rows = std::max<std::size_t>(2, static_cast<std::size_t>(weight[g] / wsum * static_cast<double>(total_rows)));
    assigned += spec.rows;
    spec.mean.resize(features);
    for (auto& m : spec.mean) m = 0.5 * rng::standard_normal(gen);
  }
  // Put the rounding remainder on the first group.
  if (assigned < total_rows) out.front().rows += total_rows - assigned;
  else out.front().rows -= std::min(out.front().rows - 2, assigned - total_rows);
  return out;
}

}  // namespace hqc::synthetic
