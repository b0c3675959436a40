#pragma once

// File formats produced by a run: linkage / dissimilarity / embedding CSV,
// dendrogram JSON and DOT, and static SVG plots.

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hqc/embedding.hpp"
#include "hqc/hqc_engine.hpp"

namespace hqc::io {

/// printf-style %.{precision}g.
std::string format_g(double value, int precision);

// Linkage CSV: header `id,child1,child2,distance,size,values`. Distances use 6
// significant digits; `values` is the sorted value list joined with ';', with
// '\' and ';' inside a value escaped by a backslash.
std::string write_linkage_csv(std::span<const LinkageRecord> records);
std::vector<LinkageRecord> parse_linkage_csv(std::istream& in);
std::vector<LinkageRecord> parse_linkage_csv(const std::string& text);

std::string join_values(std::span<const std::string> values);
std::vector<std::string> split_values(const std::string& joined);

/// K x K table with a `label` header column followed by the leaf labels.
std::string write_dissimilarity_csv(const Eigen::MatrixXd& matrix, std::span<const std::string> labels);
struct LabeledMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd entries;
};
LabeledMatrix parse_dissimilarity_csv(std::istream& in);

std::string write_embedding_csv(const Embedding2D& embedding);

/// Leaves in display order: depth-first from the root, child1 before child2.
std::vector<int> dendrogram_leaf_order(std::span<const LinkageRecord> records, std::size_t leaf_count);

/// {id, value_set, height, children: [child1, child2]} recursively; leaves
/// have height 0 and an empty children array.
std::string dendrogram_json(std::span<const LinkageRecord> records, std::span<const std::string> leaf_labels);

struct DendrogramDocuments {
  std::string svg;
  std::string dot;
};

// SVG layout constants (pixels).
inline constexpr double kLeafSpacing = 20.0;
inline constexpr double kMarginTop = 30.0;
inline constexpr double kMarginBottom = 60.0;
inline constexpr double kMarginRight = 40.0;
inline constexpr double kPlotWidth = 640.0;
inline constexpr double kCharWidth = 7.0;

/// Horizontal dendrogram: leaves on the left axis labelled "value [id]",
/// joints at x proportional to the merge distance. Each joint is a
/// `<path class="joint" data-id=... data-height=...>` element.
DendrogramDocuments render_dendrogram(std::span<const LinkageRecord> records,
                                      std::span<const std::string> leaf_labels);

std::string render_scatter_svg(const Embedding2D& embedding);

std::string xml_escape(std::string_view text);

}  // namespace hqc::io
