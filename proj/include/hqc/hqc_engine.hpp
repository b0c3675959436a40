#pragma once

// Agglomerative clustering of qualitative values. Each distinct value starts
// as one cluster holding all rows with that value; the closest pair of active
// clusters is merged repeatedly, and distances from the merged cluster are
// recomputed on its pooled rows (no Lance-Williams update), so linkage
// heights need not be monotone.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hqc/data_model.hpp"
#include "hqc/statdist.hpp"

namespace hqc {

struct ClusterNode {
  int id = 0;
  std::vector<std::string> values;       // sorted, unique
  std::vector<std::size_t> row_indices;  // sorted
  std::optional<std::pair<int, int>> children;
  double height = 0.0;

  std::size_t size() const { return row_indices.size(); }
  bool is_leaf() const { return !children.has_value(); }
};

/// One merge event. `child1` is the larger of the two merged ids.
struct LinkageRecord {
  int new_id = 0;
  int child1 = 0;
  int child2 = 0;
  double distance = 0.0;
  std::size_t size = 0;
  std::vector<std::string> values;  // sorted

  bool operator==(const LinkageRecord&) const = default;
};

/// Symmetric distance matrix over the active cluster ids.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  DissimilarityMatrix(std::vector<int> labels, Eigen::MatrixXd entries);

  std::size_t size() const { return labels_.size(); }
  const std::vector<int>& labels() const { return labels_; }
  const Eigen::MatrixXd& entries() const { return entries_; }

  std::size_t index_of(int id) const;
  double at(int a, int b) const;

  void remove(int id);
  /// Add cluster `id` with distances to the current labels, in label order.
  void append(int id, std::span<const double> distances);

 private:
  std::vector<int> labels_;
  Eigen::MatrixXd entries_;
};

/// Distance between two clusters. `prepare` is called (sequentially) for each
/// node before it takes part in any distance; `distance` must then be safe to
/// call concurrently and symmetric in its arguments.
class ClusterDistance {
 public:
  virtual ~ClusterDistance() = default;
  virtual void prepare(const ClusterNode& node) = 0;
  virtual double distance(const ClusterNode& a, const ClusterNode& b) const = 0;
  virtual void release(int /*id*/) {}
};

/// MMD distance on (optionally capped) cluster samples. Within-cluster kernel
/// terms are cached per node.
class MmdDistance final : public ClusterDistance {
 public:
  MmdDistance(const Dataset& dataset, KernelConfig config, std::optional<std::size_t> cap = {},
              std::uint64_t seed = 0);

  void prepare(const ClusterNode& node) override;
  double distance(const ClusterNode& a, const ClusterNode& b) const override;
  void release(int id) override;

  /// Pre-clamp squared MMD between two prepared nodes.
  double raw(const ClusterNode& a, const ClusterNode& b) const;
  const Sample& sample(int id) const;

 private:
  struct Entry {
    Sample sample;
    double within = 0.0;
  };
  const Entry& entry(int id) const;

  const Dataset& dataset_;
  KernelConfig config_;
  std::optional<std::size_t> cap_;
  std::uint64_t seed_;
  std::map<int, Entry> cache_;
};

/// Univariate KS or AD statistic on one feature column.
class UnivariateDistance final : public ClusterDistance {
 public:
  enum class Kind { ks, ad };
  UnivariateDistance(const Dataset& dataset, std::size_t column, Kind kind);

  void prepare(const ClusterNode&) override {}
  double distance(const ClusterNode& a, const ClusterNode& b) const override;

 private:
  std::vector<double> values_of(const ClusterNode& node) const;

  const Dataset& dataset_;
  std::size_t column_;
  Kind kind_;
};

/// Overlap or Jaccard dissimilarity between the sets of tokens that co-occur
/// with each cluster's rows in an auxiliary text column. Empty cells are ignored.
class TokenSetDistance final : public ClusterDistance {
 public:
  enum class Kind { jaccard, overlap };
  TokenSetDistance(const Dataset& dataset, const std::string& column, Kind kind);

  void prepare(const ClusterNode& node) override;
  double distance(const ClusterNode& a, const ClusterNode& b) const override;
  void release(int id) override { tokens_.erase(id); }

 private:
  const std::vector<std::string>& column_;
  std::string column_name_;
  Kind kind_;
  std::map<int, std::set<std::string>> tokens_;
};

struct HqcOptions {
  KernelConfig kernel = KernelConfig::unit_variance_default();
  std::optional<std::size_t> cap;
  std::uint64_t seed = 0;
};

struct HqcResult {
  std::vector<ClusterNode> nodes;  // indexed by id; leaves first
  std::vector<LinkageRecord> linkage;
  DissimilarityMatrix initial;
};

/// Leaf clusters 0..K-1 in group order.
std::vector<ClusterNode> make_leaves(std::span<const ValueGroup> groups);

/// Prepares every leaf and fills all K(K-1)/2 pairs once, mirrored.
DissimilarityMatrix initial_dissimilarity(std::span<const ClusterNode> leaves, ClusterDistance& distance);
DissimilarityMatrix initial_dissimilarity(std::span<const ValueGroup> groups, const Dataset& dataset,
                                          const KernelConfig& config);

/// Merge the closest active pair (ties: smallest (min id, max id)), append the
/// merged node to `nodes` and update `matrix` in place.
LinkageRecord merge_step(DissimilarityMatrix& matrix, std::vector<ClusterNode>& nodes,
                         ClusterDistance& distance);

HqcResult run_hqc(std::vector<ClusterNode> leaves, ClusterDistance& distance);
HqcResult run_hqc(const Dataset& dataset, std::span<const ValueGroup> groups,
                  const HqcOptions& options = {});

/// Partition of leaf values after applying, in record order, only the merges
/// with distance < threshold. Applying a merge joins every value under both
/// children. Groups are sorted internally and ordered by their smallest leaf id.
std::vector<std::vector<std::string>> cut_linkage(std::span<const LinkageRecord> records,
                                                  std::span<const std::string> leaf_values,
                                                  double threshold);

}  // namespace hqc
