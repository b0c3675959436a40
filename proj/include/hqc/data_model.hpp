#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hqc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Quantitative matrix plus one qualitative column, row-aligned.
///
/// `auxiliary` holds extra text columns requested at load time (for example a
/// second qualitative column used by the token-set baselines). Missing cells in
/// auxiliary columns are kept as empty strings and do not cause a row drop.
struct Dataset {
  RowMatrix quantitative;
  std::vector<std::string> qualitative;
  std::vector<std::string> column_names;
  std::string label_name;
  std::map<std::string, std::vector<std::string>> auxiliary;

  std::size_t dropped_rows = 0;
  std::vector<std::string> zero_variance_columns;
  bool standardized = false;

  std::size_t rows() const { return static_cast<std::size_t>(quantitative.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(quantitative.cols()); }

  /// Index of a feature column, or nullopt.
  std::optional<std::size_t> column_index(const std::string& name) const;
};

struct ValueGroup {
  std::string value;
  std::vector<std::size_t> row_indices;  // strictly increasing
  std::size_t count = 0;
};

/// Rows of the quantitative matrix drawn for a cluster.
struct Sample {
  RowMatrix rows;

  Sample() = default;
  explicit Sample(RowMatrix r) : rows(std::move(r)) {}

  std::size_t n() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(rows.cols()); }
  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * dims(), dims()};
  }
};

struct LoadOptions {
  std::string label_column;
  /// Empty selects every column (other than the label and auxiliary columns)
  /// whose non-empty cells all parse as numbers.
  std::vector<std::string> feature_columns;
  std::vector<std::string> auxiliary_columns;
};

Dataset load_csv(const std::filesystem::path& path, const LoadOptions& options);
Dataset load_csv(std::istream& in, const LoadOptions& options);

/// Parse an integer or floating-point literal; anything else (including
/// inf/nan and empty strings) yields nullopt.
std::optional<double> parse_number(std::string_view text);

/// Z-score every column with the n-1 standard deviation. Zero-variance
/// columns become all-zero and are listed in `zero_variance_columns`.
Dataset standardize(const Dataset& dataset);

/// Groups ordered by descending count, ties by value. Throws DataError when
/// fewer than two groups survive the top_k / min_count filters.
std::vector<ValueGroup> group_by_value(const Dataset& dataset,
                                       std::optional<std::size_t> top_k,
                                       std::size_t min_count = 2);

/// New dataset holding only `rows` (in the given order). Drop counts and
/// flags are carried over.
Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> rows);

/// Below this group size the unbiased estimator is noisy enough to go negative often.
inline constexpr std::size_t kSmallGroupWarning = 30;

/// Copy the given rows (in order) into a Sample. If `cap` is set and smaller
/// than the row count, a uniform subsample of `cap` rows is drawn from
/// `stream_seed`; the subsample keeps the original relative row order.
Sample draw_sample(const Dataset& dataset, std::span<const std::size_t> rows,
                   std::optional<std::size_t> cap, std::uint64_t stream_seed);

/// Concatenated rows of the groups, subsampled to `cap` with a stream derived
/// from `seed` and the groups' values.
Sample sample_for(std::span<const ValueGroup> groups, const Dataset& dataset,
                  std::optional<std::size_t> cap, std::uint64_t seed);

}  // namespace hqc
