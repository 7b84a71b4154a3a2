#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace prism;

namespace {

Eigen::MatrixXd random_columns(Eigen::Index dim, Eigen::Index n, std::mt19937_64& rng) {
  Eigen::MatrixXd m(dim, n);
  for (Eigen::Index c = 0; c < n; ++c) m.col(c) = prism::test::random_unit(dim, rng).transpose();
  return m;
}

}  // namespace

TEST(Ortho, SingleAxis) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 1);
  a(0, 0) = 1;
  Eigen::Vector4d expected(0, 1, 1, 1);
  EXPECT_LE((orthogonal_projection(AttributeMatrix(a)).values() - Eigen::MatrixXd(expected.asDiagonal())).norm(), 1e-12);
}

TEST(Ortho, CorrelatedColumnsSpanPlane) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 2);
  a(0, 0) = 1;
  a(0, 1) = a(1, 1) = 1 / std::sqrt(2.0);
  Eigen::Vector4d expected(0, 0, 1, 1);
  EXPECT_LE((orthogonal_projection(AttributeMatrix(a)).values() - Eigen::MatrixXd(expected.asDiagonal())).norm(), 1e-12);
}

TEST(Ortho, MatchesSvdComplement) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_columns(8, 3, rng);
    const auto P = orthogonal_projection(AttributeMatrix(a)).values();
    EXPECT_LE((P - prism::test::svd_complement(a)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Ortho, ProjectorAlgebra) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const auto a = random_columns(16, n, rng);
    const auto P = orthogonal_projection(AttributeMatrix(a)).values();
    for (Eigen::Index c = 0; c < n; ++c) EXPECT_LE((P * a.col(c)).norm(), 1e-6);
    EXPECT_LE((P * P - P).norm(), 1e-6);
    EXPECT_LE((P - P.transpose()).norm(), 1e-9);
    // A vector orthogonal to the span passes through unchanged.
    Eigen::VectorXd v = prism::test::random_unit(16, rng).transpose();
    v = prism::test::svd_complement(a) * v;
    EXPECT_LE((P * v - v).norm(), 1e-6 * v.norm());
  }
}

TEST(Ortho, DuplicatedColumnChangesNothing) {
  std::mt19937_64 rng(23);
  const auto a = random_columns(10, 3, rng);
  Eigen::MatrixXd dup(10, 4);
  dup << a, 2.5 * a.col(1);
  EXPECT_LE((orthogonal_projection(AttributeMatrix(a)).values() - orthogonal_projection(AttributeMatrix(dup)).values())
                .cwiseAbs()
                .maxCoeff(),
            1e-6);
}

TEST(Ortho, RejectsBadInput) {
  EXPECT_THROW(AttributeMatrix(Eigen::MatrixXd::Zero(4, 0)), DataError);
  EXPECT_THROW(AttributeMatrix(Eigen::MatrixXd::Ones(3, 3)), DataError);
  EXPECT_THROW(AttributeMatrix(Eigen::MatrixXd::Zero(4, 1)), DataError);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Ones(4, 1);
  nan(2, 0) = std::nan("");
  EXPECT_THROW(AttributeMatrix{nan}, DataError);
}

TEST(Ortho, FromAttributeSet) {
  RowMatrix v(2, 4);
  v << 1, 0, 0, 0, 0, 3, 0, 0;
  EmbeddingRecord a{"water"}, b{"land"};
  a.attribute_label = 0;
  b.attribute_label = 1;
  const EmbeddingSet set(SetKind::attribute, 4, {a, b}, v, {}, {"water", "land"});
  Eigen::Vector4d expected(0, 0, 1, 1);
  EXPECT_LE((orthogonal_projection(AttributeMatrix::from_set(set)).values() - Eigen::MatrixXd(expected.asDiagonal())).norm(),
            1e-12);
}
