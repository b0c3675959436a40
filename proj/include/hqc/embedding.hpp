#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "hqc/hqc_engine.hpp"

namespace hqc {

struct Embedding2D {
  std::vector<std::string> labels;
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> explained_variance_ratio{0.0, 0.0};
};

/// PCA of the dissimilarity rows: each row is a K-dimensional feature vector,
/// columns are centered, and rows are projected on the two leading principal
/// directions. Each direction is signed so its largest-magnitude loading is
/// positive. A component with no variance is returned as zeros. Needs K >= 3.
Embedding2D embed_dissimilarity(const Eigen::MatrixXd& matrix, std::vector<std::string> labels);
Embedding2D embed_dissimilarity(const DissimilarityMatrix& matrix, std::vector<std::string> labels);

}  // namespace hqc
