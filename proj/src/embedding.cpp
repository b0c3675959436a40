#include "hqc/embedding.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

#include "hqc/error.hpp"

namespace hqc {

Embedding2D embed_dissimilarity(const Eigen::MatrixXd& matrix, std::vector<std::string> labels) {
  const Eigen::Index k = matrix.rows();
  if (matrix.cols() != k) throw std::invalid_argument("dissimilarity matrix must be square");
  if (k < 3) throw DataError("2-D embedding needs at least 3 clusters");
  if (labels.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("one label per dissimilarity row is required");
  }

  const Eigen::MatrixXd centered = matrix.rowwise() - matrix.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  const double tol = std::max(1e-300, sv(0) * 1e-12 * static_cast<double>(k));

  Embedding2D out;
  out.labels = std::move(labels);
  out.coords.assign(static_cast<std::size_t>(k), {0.0, 0.0});
  for (Eigen::Index c = 0; c < 2; ++c) {
    if (!(sv(c) > tol)) continue;
    Eigen::VectorXd dir = svd.matrixV().col(c);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0) dir = -dir;
    const Eigen::VectorXd scores = centered * dir;
    for (Eigen::Index i = 0; i < k; ++i) {
      out.coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = scores(i);
    }
    out.explained_variance_ratio[static_cast<std::size_t>(c)] = sv(c) * sv(c) / total;
  }
  return out;
}

Embedding2D embed_dissimilarity(const DissimilarityMatrix& matrix, std::vector<std::string> labels) {
  return embed_dissimilarity(matrix.entries(), std::move(labels));
}

}  // namespace hqc
