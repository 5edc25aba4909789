#include <random>

#include <gtest/gtest.h>

#include "cmcopt/cone_qp.hpp"
#include "cmcopt/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace cmcopt {
namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(ConeQp, NoRowsReturnsThePoint) {
  const Vector p = Eigen::Vector3d(1.0, -2.0, 0.5);
  const ConeQpResult r = project_to_cone(p, Matrix(0, 3));
  EXPECT_EQ(r.theta, p);
  EXPECT_EQ(r.multipliers.size(), 0);
}

TEST(ConeQp, CoordinateHalfSpace) {
  const ConeQpResult r = project_to_cone(Eigen::Vector2d(-1.0, 2.0), rows({{1.0, 0.0}}));
  EXPECT_LT((r.theta - Eigen::Vector2d(0.0, 2.0)).norm(), 1e-14);
  EXPECT_EQ(r.working_set, (std::vector<int>{0}));
  EXPECT_NEAR(r.multipliers[0], 1.0, 1e-14);
}

TEST(ConeQp, InsidePointIsFixed) {
  const ConeQpResult r = project_to_cone(Eigen::Vector2d(3.0, -1.0), rows({{1.0, 1.0}}));
  EXPECT_LT((r.theta - Eigen::Vector2d(3.0, -1.0)).norm(), 1e-14);
  EXPECT_TRUE(r.working_set.empty());
}

TEST(ConeQp, PointedConeMapsPolarPointsToZero) {
  // the nonnegative orthant's polar is the nonpositive orthant
  const ConeQpResult r = project_to_cone(Eigen::Vector2d(-1.0, -3.0), Matrix::Identity(2, 2));
  EXPECT_LT(r.theta.norm(), 1e-14);
  EXPECT_GE(r.multipliers.minCoeff(), 0.0);
}

TEST(ConeQp, MoreRowsThanDimensions) {
  // four rows in the plane, cone is the wedge between 30 and 60 degrees
  const double a = std::acos(-1.0) / 6.0, b = std::acos(-1.0) / 3.0;
  Matrix m(4, 2);
  m << -std::sin(a), std::cos(a), std::sin(b), -std::cos(b), 0.0, 1.0, 1.0, 0.0;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vector p = fixtures::gaussian(2, 1, rng).col(0);
    const Vector expect = oracle::cone_projection_enumerate(p, m);
    EXPECT_LT((project_to_cone(p, m).theta - expect).norm(), 1e-10);
  }
}

TEST(ConeQp, GeneralQuadraticMatchesKkt) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const Matrix l = fixtures::gaussian(4, 4, rng);
    const Matrix h = l * l.transpose() + 0.1 * Matrix::Identity(4, 4);
    const Vector g = fixtures::gaussian(4, 1, rng).col(0);
    const Matrix a = fixtures::gaussian(3, 4, rng);
    const ConeQpResult r = solve_cone_qp(h, g, a);
    // primal feasibility, dual feasibility, stationarity, complementarity
    EXPECT_GE((a * r.theta).minCoeff(), -1e-10);
    EXPECT_GE(r.multipliers.minCoeff(), -1e-12);
    EXPECT_LT((h * r.theta + g - a.transpose() * r.multipliers).norm(), 1e-9);
    EXPECT_LT(std::abs(r.multipliers.dot(a * r.theta)), 1e-9);
  }
}

TEST(ConeQp, WarmStartGivesTheSameAnswer) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const Matrix a = fixtures::gaussian(3, 4, rng);
    const Vector p = fixtures::gaussian(4, 1, rng).col(0);
    const ConeQpResult cold = project_to_cone(p, a);
    const Vector q = p + 1e-3 * fixtures::gaussian(4, 1, rng).col(0);
    const ConeQpResult warm = project_to_cone(q, a, cold.working_set);
    EXPECT_LT((warm.theta - project_to_cone(q, a).theta).norm(), 1e-12);
  }
}

TEST(ConeQp, IterationCapReportsResidual) {
  ConeQpOptions opt;
  opt.max_iterations = 1;
  const Matrix a = Matrix::Identity(3, 3);
  try {
    project_to_cone(Eigen::Vector3d(-1.0, -1.0, -1.0), a, {}, opt);
    FAIL() << "expected QpError";
  } catch (const QpError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(ConeQp, LowerBoundsClipTheStep) {
  // min (t - 2)^2 subject to -t >= -1
  const ConeQpResult r = solve_cone_qp(Matrix::Constant(1, 1, 2.0), Vector::Constant(1, -4.0),
                                       Matrix::Constant(1, 1, -1.0), Vector::Constant(1, -1.0));
  EXPECT_NEAR(r.theta[0], 1.0, 1e-14);
  EXPECT_NEAR(r.multipliers[0], 2.0, 1e-12);
  EXPECT_THROW(solve_cone_qp(Matrix::Identity(1, 1), Vector::Zero(1), Matrix::Identity(1, 1), Vector::Ones(1)),
               PreconditionError);
}

TEST(ConeQpProperty, LowerBoundSolutionsSatisfyKkt) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(1, 6), nrows(1, 6);
  std::uniform_real_distribution<double> slack(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng), k = nrows(rng);
    const Matrix m = fixtures::gaussian(n, n, rng);
    const Matrix h = m * m.transpose() + 0.1 * Matrix::Identity(n, n);
    const Vector g = fixtures::gaussian(n, 1, rng).col(0);
    const Matrix a = fixtures::gaussian(k, n, rng);
    Vector lower(k);
    for (int i = 0; i < k; ++i) lower[i] = trial % 3 == 0 ? 0.0 : -slack(rng);
    const ConeQpResult r = solve_cone_qp(h, g, a, lower);
    const Vector resid = a * r.theta - lower;
    EXPECT_GE(resid.minCoeff(), -1e-10);
    EXPECT_GE(r.multipliers.minCoeff(), 0.0);
    EXPECT_LT(std::abs(resid.dot(r.multipliers)), 1e-9);
    EXPECT_LT((h * r.theta + g - a.transpose() * r.multipliers).norm(), 1e-9 * (1.0 + g.norm()));
  }
}

TEST(ConeQpProperty, IdempotentNonExpansiveAndVariational) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 6), nrows(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng), k = nrows(rng);
    const Matrix a = fixtures::gaussian(k, n, rng);
    const Vector p1 = fixtures::gaussian(n, 1, rng).col(0);
    const Vector p2 = fixtures::gaussian(n, 1, rng).col(0);
    const Vector t1 = project_to_cone(p1, a).theta;
    const Vector t2 = project_to_cone(p2, a).theta;
    EXPECT_LT((project_to_cone(t1, a).theta - t1).norm(), 1e-12);
    EXPECT_LE((t1 - t2).norm(), (p1 - p2).norm() + 1e-12);
    for (int s = 0; s < 50; ++s) {
      const Vector q = oracle::cone_projection_enumerate(fixtures::gaussian(n, 1, rng).col(0), a);
      EXPECT_LE((p1 - t1).dot(q - t1), 1e-10);
    }
  }
}

}  // namespace
}  // namespace cmcopt
