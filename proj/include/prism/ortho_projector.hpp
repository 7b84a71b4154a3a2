#pragma once

// Closed-form debiasing projector P = I - A (A^T A)^+ A^T, built from an
// orthonormal basis of col-span(A) so that linearly dependent attribute
// embeddings are handled.

#include <prism/embedding_set.hpp>
#include <prism/error.hpp>
#include <prism/projection.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace prism {

/// Attribute embeddings as matrix columns; columns are normalized on
/// construction.
class AttributeMatrix {
 public:
  explicit AttributeMatrix(Eigen::MatrixXd columns) : columns_(std::move(columns)) {
    if (columns_.cols() < 1) throw DataError("attribute matrix needs at least one column");
    if (columns_.rows() < 2) throw DataError("attribute matrix needs dim >= 2");
    if (columns_.cols() >= columns_.rows()) {
      throw DataError("attribute count " + std::to_string(columns_.cols()) + " must be below dim " +
                      std::to_string(columns_.rows()));
    }
    if (!columns_.allFinite()) throw DataError("attribute matrix has non-finite entries");
    for (Eigen::Index c = 0; c < columns_.cols(); ++c) {
      const double n = columns_.col(c).norm();
      if (!(n > 0.0)) throw DataError("attribute column " + std::to_string(c) + " is all zero");
      columns_.col(c) /= n;
    }
  }

  static AttributeMatrix from_set(const EmbeddingSet& attributes) {
    return AttributeMatrix(attributes.vectors().transpose());
  }

  Eigen::Index dim() const { return columns_.rows(); }
  Eigen::Index count() const { return columns_.cols(); }
  const Eigen::MatrixXd& columns() const { return columns_; }

 private:
  Eigen::MatrixXd columns_;
};

/// Orthogonal projector onto the complement of col-span(A). Rank is decided by
/// column-pivoted Householder QR with threshold rank_tol * |R_00|.
inline ProjectionMatrix orthogonal_projection(const AttributeMatrix& attrs, double rank_tol = 1e-8) {
  const auto& a = attrs.columns();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const auto& r = qr.matrixR();
  const double largest = std::abs(r(0, 0));
  Eigen::Index rank = 0;
  const Eigen::Index diag = std::min(r.rows(), r.cols());
  while (rank < diag && std::abs(r(rank, rank)) > rank_tol * largest) ++rank;

  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), rank);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(a.rows(), a.rows()) - q * q.transpose();
  // Symmetrize away rounding in the outer product.
  p = 0.5 * (p + p.transpose()).eval();
  return ProjectionMatrix(std::move(p));
}

}  // namespace prism
