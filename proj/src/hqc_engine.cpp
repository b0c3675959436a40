#include "hqc/hqc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "hqc/error.hpp"
#include "hqc/random.hpp"

namespace hqc {

// ---------------------------------------------------------------------------
// DissimilarityMatrix

DissimilarityMatrix::DissimilarityMatrix(std::vector<int> labels, Eigen::MatrixXd entries)
    : labels_(std::move(labels)), entries_(std::move(entries)) {
  const auto k = static_cast<Eigen::Index>(labels_.size());
  if (entries_.rows() != k || entries_.cols() != k) {
    throw std::invalid_argument("dissimilarity matrix shape does not match its labels");
  }
}

std::size_t DissimilarityMatrix::index_of(int id) const {
  const auto it = std::find(labels_.begin(), labels_.end(), id);
  if (it == labels_.end()) throw std::out_of_range("cluster " + std::to_string(id) + " is not active");
  return static_cast<std::size_t>(it - labels_.begin());
}

double DissimilarityMatrix::at(int a, int b) const {
  return entries_(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
}

void DissimilarityMatrix::remove(int id) {
  const auto idx = static_cast<Eigen::Index>(index_of(id));
  const Eigen::Index k = entries_.rows();
  Eigen::MatrixXd next(k - 1, k - 1);
  for (Eigen::Index i = 0, r = 0; i < k; ++i) {
    if (i == idx) continue;
    for (Eigen::Index j = 0, c = 0; j < k; ++j) {
      if (j == idx) continue;
      next(r, c++) = entries_(i, j);
    }
    ++r;
  }
  entries_ = std::move(next);
  labels_.erase(labels_.begin() + idx);
}

void DissimilarityMatrix::append(int id, std::span<const double> distances) {
  if (distances.size() != labels_.size()) {
    throw std::invalid_argument("appended row must have one distance per active cluster");
  }
  const Eigen::Index k = entries_.rows();
  entries_.conservativeResize(k + 1, k + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    entries_(i, k) = distances[static_cast<std::size_t>(i)];
    entries_(k, i) = distances[static_cast<std::size_t>(i)];
  }
  entries_(k, k) = 0.0;
  labels_.push_back(id);
}

// ---------------------------------------------------------------------------
// Distances

MmdDistance::MmdDistance(const Dataset& dataset, KernelConfig config, std::optional<std::size_t> cap,
                         std::uint64_t seed)
    : dataset_(dataset), config_(config), cap_(cap), seed_(seed) {}

void MmdDistance::prepare(const ClusterNode& node) {
  Entry e;
  e.sample = draw_sample(dataset_, node.row_indices, cap_,
                         rng::derive_seed(seed_, static_cast<std::uint64_t>(node.id)));
  e.within = within_kernel_mean(e.sample, config_);
  cache_.insert_or_assign(node.id, std::move(e));
}

const MmdDistance::Entry& MmdDistance::entry(int id) const {
  const auto it = cache_.find(id);
  if (it == cache_.end()) throw std::logic_error("cluster " + std::to_string(id) + " was not prepared");
  return it->second;
}

const Sample& MmdDistance::sample(int id) const { return entry(id).sample; }

double MmdDistance::raw(const ClusterNode& a, const ClusterNode& b) const {
  const Entry& ea = entry(a.id);
  const Entry& eb = entry(b.id);
  return combine_mmd2(ea.within, eb.within, cross_kernel_mean(ea.sample, eb.sample, config_));
}

double MmdDistance::distance(const ClusterNode& a, const ClusterNode& b) const {
  return clamp_distance(raw(a, b));
}

void MmdDistance::release(int id) { cache_.erase(id); }

UnivariateDistance::UnivariateDistance(const Dataset& dataset, std::size_t column, Kind kind)
    : dataset_(dataset), column_(column), kind_(kind) {
  if (column >= dataset.dims()) throw std::out_of_range("univariate distance column out of range");
}

std::vector<double> UnivariateDistance::values_of(const ClusterNode& node) const {
  std::vector<double> out;
  out.reserve(node.row_indices.size());
  for (std::size_t r : node.row_indices) {
    out.push_back(dataset_.quantitative(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column_)));
  }
  return out;
}

double UnivariateDistance::distance(const ClusterNode& a, const ClusterNode& b) const {
  const auto va = values_of(a);
  const auto vb = values_of(b);
  return kind_ == Kind::ks ? ks_statistic(va, vb) : ad_statistic(va, vb);
}

TokenSetDistance::TokenSetDistance(const Dataset& dataset, const std::string& column, Kind kind)
    : column_([&]() -> const std::vector<std::string>& {
        const auto it = dataset.auxiliary.find(column);
        if (it == dataset.auxiliary.end()) {
          throw ConfigError("context column '" + column + "' was not loaded");
        }
        return it->second;
      }()),
      column_name_(column),
      kind_(kind) {}

void TokenSetDistance::prepare(const ClusterNode& node) {
  std::set<std::string> tokens;
  for (std::size_t r : node.row_indices) {
    if (!column_[r].empty()) tokens.insert(column_[r]);
  }
  if (tokens.empty()) {
    throw DataError("cluster " + std::to_string(node.id) + " has no tokens in column '" +
                    column_name_ + "'");
  }
  tokens_.insert_or_assign(node.id, std::move(tokens));
}

double TokenSetDistance::distance(const ClusterNode& a, const ClusterNode& b) const {
  const auto& ta = tokens_.at(a.id);
  const auto& tb = tokens_.at(b.id);
  return kind_ == Kind::jaccard ? jaccard_distance(ta, tb) : overlap_dissimilarity(ta, tb);
}

// ---------------------------------------------------------------------------
// Clustering

std::vector<ClusterNode> make_leaves(std::span<const ValueGroup> groups) {
  std::vector<ClusterNode> leaves;
  leaves.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    ClusterNode node;
    node.id = static_cast<int>(i);
    node.values = {groups[i].value};
    node.row_indices = groups[i].row_indices;
    leaves.push_back(std::move(node));
  }
  return leaves;
}

DissimilarityMatrix initial_dissimilarity(std::span<const ClusterNode> leaves, ClusterDistance& distance) {
  if (leaves.size() < 2) throw DataError("clustering needs at least 2 initial clusters");
  for (const auto& leaf : leaves) distance.prepare(leaf);

  const auto k = static_cast<Eigen::Index>(leaves.size());
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(k, k);
  std::vector<int> labels;
  labels.reserve(leaves.size());
  for (Eigen::Index a = 0; a < k; ++a) {
    labels.push_back(leaves[static_cast<std::size_t>(a)].id);
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double d =
          distance.distance(leaves[static_cast<std::size_t>(a)], leaves[static_cast<std::size_t>(b)]);
      entries(a, b) = d;
      entries(b, a) = d;
    }
  }
  return DissimilarityMatrix(std::move(labels), std::move(entries));
}

DissimilarityMatrix initial_dissimilarity(std::span<const ValueGroup> groups, const Dataset& dataset,
                                          const KernelConfig& config) {
  MmdDistance mmd(dataset, config);
  const auto leaves = make_leaves(groups);
  return initial_dissimilarity(leaves, mmd);
}

namespace {

template <typename T>
std::vector<T> sorted_union(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

LinkageRecord merge_step(DissimilarityMatrix& matrix, std::vector<ClusterNode>& nodes,
                         ClusterDistance& distance) {
  if (matrix.size() < 2) throw std::invalid_argument("merge_step needs at least 2 active clusters");

  const auto& labels = matrix.labels();
  const auto& entries = matrix.entries();
  auto best = std::make_tuple(std::numeric_limits<double>::infinity(), std::numeric_limits<int>::max(),
                              std::numeric_limits<int>::max());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      const auto cand = std::make_tuple(entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                                        std::min(labels[i], labels[j]), std::max(labels[i], labels[j]));
      if (cand < best) best = cand;
    }
  }
  const auto [height, low, high] = best;
  if (!std::isfinite(height)) throw DataError("non-finite cluster distance");

  const ClusterNode& a = nodes.at(static_cast<std::size_t>(high));
  const ClusterNode& b = nodes.at(static_cast<std::size_t>(low));
  ClusterNode merged;
  merged.id = static_cast<int>(nodes.size());
  merged.values = sorted_union(a.values, b.values);
  merged.row_indices = sorted_union(a.row_indices, b.row_indices);
  merged.children = std::make_pair(high, low);
  merged.height = height;

  LinkageRecord record{merged.id, high, low, height, merged.size(), merged.values};

  matrix.remove(high);
  matrix.remove(low);
  distance.prepare(merged);
  std::vector<double> row(matrix.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    row[i] = distance.distance(nodes.at(static_cast<std::size_t>(matrix.labels()[i])), merged);
  }
  matrix.append(merged.id, row);
  distance.release(high);
  distance.release(low);

  nodes.push_back(std::move(merged));
  return record;
}

HqcResult run_hqc(std::vector<ClusterNode> leaves, ClusterDistance& distance) {
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (leaves[i].id != static_cast<int>(i)) throw std::invalid_argument("leaf ids must be 0..K-1");
  }
  HqcResult result;
  result.initial = initial_dissimilarity(leaves, distance);
  result.nodes = std::move(leaves);
  result.nodes.reserve(2 * result.nodes.size() - 1);

  DissimilarityMatrix active = result.initial;
  while (active.size() > 1) {
    result.linkage.push_back(merge_step(active, result.nodes, distance));
  }
  distance.release(active.labels().front());
  return result;
}

HqcResult run_hqc(const Dataset& dataset, std::span<const ValueGroup> groups, const HqcOptions& options) {
  MmdDistance mmd(dataset, options.kernel, options.cap, options.seed);
  return run_hqc(make_leaves(groups), mmd);
}

std::vector<std::vector<std::string>> cut_linkage(std::span<const LinkageRecord> records,
                                                  std::span<const std::string> leaf_values,
                                                  double threshold) {
  if (std::isnan(threshold) || threshold < 0.0) {
    throw std::invalid_argument("cut threshold must be a non-negative number");
  }
  const std::size_t k = leaf_values.size();
  if (records.size() + 1 != k && !(k == 0 && records.empty())) {
    throw std::invalid_argument("linkage must hold exactly K-1 records for K leaf values");
  }

  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  // Leaves under each node id, built structurally whether or not a merge is applied.
  std::vector<std::vector<std::size_t>> under(k + records.size());
  std::vector<bool> used(k + records.size(), false);
  for (std::size_t i = 0; i < k; ++i) under[i] = {i};
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& rec = records[t];
    const auto id = static_cast<std::size_t>(rec.new_id);
    const auto c1 = static_cast<std::size_t>(rec.child1);
    const auto c2 = static_cast<std::size_t>(rec.child2);
    if (id != k + t || c1 >= id || c2 >= id || c1 == c2 || used[c1] || used[c2]) {
      throw std::invalid_argument("malformed linkage record " + std::to_string(rec.new_id));
    }
    used[c1] = used[c2] = true;
    under[id] = under[c1];
    under[id].insert(under[id].end(), under[c2].begin(), under[c2].end());
    if (rec.distance < threshold) {
      const std::size_t root = find(under[id].front());
      for (std::size_t leaf : under[id]) parent[find(leaf)] = root;
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> members;  // root -> leaves
  for (std::size_t i = 0; i < k; ++i) members[find(i)].push_back(i);
  std::vector<std::pair<std::size_t, std::vector<std::string>>> groups;
  for (const auto& [root, leaves] : members) {
    std::vector<std::string> vals;
    for (std::size_t leaf : leaves) vals.push_back(leaf_values[leaf]);
    std::sort(vals.begin(), vals.end());
    groups.emplace_back(leaves.front(), std::move(vals));
  }
  std::sort(groups.begin(), groups.end());
  std::vector<std::vector<std::string>> out;
  out.reserve(groups.size());
  for (auto& g : groups) out.push_back(std::move(g.second));
  return out;
}

}  // namespace hqc
