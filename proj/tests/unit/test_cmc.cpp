#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cmcopt/cmc.hpp"
#include "cmcopt/errors.hpp"
#include "cmcopt/problems.hpp"
#include "cmcopt/retraction.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace cmcopt {
namespace {

ConstrainedManifold half_sphere() { return fixtures::first_manifold(half_sphere_problem()); }

Vector v3(double x, double y, double z) { return Eigen::Vector3d(x, y, z); }

TEST(Cmc, InteriorPointHasNoActiveRows) {
  const ConstrainedManifold m = half_sphere();
  const ActiveSet a = classify_active(m, v3(0, 0, 1));
  EXPECT_TRUE(a.interior());
  EXPECT_EQ(a.inactive, (std::vector<int>{0}));
}

TEST(Cmc, BoundaryPointIsACorner) {
  const ActiveSet a = classify_active(half_sphere(), v3(1, 0, 0));
  EXPECT_EQ(a.active, (std::vector<int>{0}));
  EXPECT_TRUE(a.inactive.empty());
}

TEST(Cmc, InfeasiblePointNamesTheRow) {
  try {
    classify_active(half_sphere(), v3(1, 0, -0.01));
    FAIL() << "expected InfeasiblePointError";
  } catch (const InfeasiblePointError& e) {
    EXPECT_EQ(e.row(), 0);
    EXPECT_DOUBLE_EQ(e.value(), -0.01);
  }
}

TEST(Cmc, ScalingAnInequalityKeepsTheActiveSetWithZeroTolerance) {
  FactorGraph g;
  const auto x = g.add_variable(2);
  ManifoldOptions opt;
  opt.active_tol = 0.0;
  std::vector<InequalityFactor> base{InequalityFactor({x}, 1, [](const Vector& v) { return Vector::Constant(1, v[0]); }),
                                     InequalityFactor({x}, 1, [](const Vector& v) { return Vector::Constant(1, v[1] - 0.5); })};
  std::vector<InequalityFactor> scaled{
      InequalityFactor({x}, 1, [](const Vector& v) { return Vector::Constant(1, 7.0 * v[0]); }),
      InequalityFactor({x}, 1, [](const Vector& v) { return Vector::Constant(1, 0.01 * (v[1] - 0.5)); })};
  const ConstrainedManifold a({x}, {}, base, opt), b({x}, {}, scaled, opt);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    Vector p(2);
    p << (i % 3 == 0 ? 0.0 : u(rng)), (i % 4 == 0 ? 0.5 : 0.5 + u(rng));
    EXPECT_EQ(classify_active(a, p).active, classify_active(b, p).active);
  }
}

TEST(Cmc, ScalingKeepsExactBoundaryPointsActiveWithTolerance) {
  FactorGraph g;
  const auto x = g.add_variable(1);
  const ConstrainedManifold a({x}, {}, {InequalityFactor({x}, 1, [](const Vector& v) { return v; })});
  const ConstrainedManifold b({x}, {}, {InequalityFactor({x}, 1, [](const Vector& v) { return 1e6 * v; })});
  EXPECT_EQ(classify_active(a, Vector::Zero(1)).active, classify_active(b, Vector::Zero(1)).active);
}

TEST(Cmc, SphereRankIsOne) {
  const ConstrainedManifold m = half_sphere();
  const RankReport r = check_rank(m, v3(0, 0, 1), classify_active(m, v3(0, 0, 1)));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.expected, 1);
}

TEST(Cmc, DuplicateEqualityIsRankDeficient) {
  FactorGraph g;
  const auto x = g.add_variable(3);
  auto sphere = [](const Vector& v) { return Vector::Constant(1, v.squaredNorm() - 1.0); };
  const ConstrainedManifold m({x}, {EqualityFactor({x}, 1, sphere), EqualityFactor({x}, 1, sphere)}, {});
  const Vector p = v3(0, 0, 1);
  const RankReport r = check_rank(m, p, classify_active(m, p));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.expected, 2);
  EXPECT_FALSE(r.dependent_rows.empty());
  EXPECT_THROW(tangent_basis(m, p), RankDeficiencyError);
}

// Corner of the bottom manifold where g2 and g3 are both active, located by bisection.
Vector bottom_corner() {
  const double x = oracle::bisect([](double t) { return t * t * t - 0.1; }, 0.0, 1.0);
  return v3(x, std::sqrt(1.0 - x * x), 0.0);
}

TEST(Cmc, BottomManifoldCornerHasFullRank) {
  const ConstrainedManifold m = fixtures::first_manifold(corner_manifold_problems().bottom);
  const Vector p = bottom_corner();
  const ActiveSet a = classify_active(m, p);
  EXPECT_EQ(a.active, (std::vector<int>{0, 1}));
  const RankReport r = check_rank(m, p, a);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.rank, 3);
  EXPECT_EQ(corner_model_dims(m, p), (CornerDims{2, 0}));
}

TEST(Cmc, SphereBasisAtNorthPole) {
  const ConstrainedManifold m = half_sphere();
  const TangentBasis b = tangent_basis(m, v3(0, 0, 1));
  ASSERT_EQ(b.dim(), 2);
  EXPECT_LT(b.basis.row(2).norm(), 1e-14);
  EXPECT_EQ(b.cone_rows.rows(), 0);
}

TEST(Cmc, HalfSphereBoundaryConeIsAHalfPlane) {
  const ConstrainedManifold m = half_sphere();
  const TangentBasis b = tangent_basis(m, v3(1, 0, 0));
  ASSERT_EQ(b.dim(), 2);
  EXPECT_LT(b.basis.row(0).norm(), 1e-14);  // spans {e2, e3}
  ASSERT_EQ(b.cone_rows.rows(), 1);
  // cone row is e3^T B: theta is admissible iff its ambient z-component is >= 0
  EXPECT_LT((b.cone_rows.row(0).transpose() - b.basis.transpose() * Eigen::Vector3d::UnitZ()).norm(), 1e-14);
  EXPECT_NEAR(b.cone_rows.norm(), 1.0, 1e-14);
}

TEST(Cmc, TopManifoldBasisIsIdentity) {
  const ConstrainedManifold m = fixtures::first_manifold(corner_manifold_problems().top);
  const TangentBasis b = tangent_basis(m, v3(0.1, 0.2, 0.3));
  EXPECT_TRUE(b.basis.isApprox(Matrix::Identity(3, 3)));
  EXPECT_EQ(corner_model_dims(m, v3(0.1, 0.2, 0.3)), (CornerDims{3, 3}));
}

TEST(Cmc, CornerDimsOnHalfSphere) {
  const ConstrainedManifold m = half_sphere();
  EXPECT_EQ(corner_model_dims(m, v3(0, 0, 1)), (CornerDims{2, 2}));
  EXPECT_EQ(corner_model_dims(m, v3(1, 0, 0)), (CornerDims{2, 1}));
}

TEST(Cmc, MoreEqualityRowsThanVariablesIsRejected) {
  FactorGraph g;
  const auto x = g.add_variable(1);
  auto f = [](const Vector& v) { return Vector::Constant(2, v[0]); };
  EXPECT_THROW(ConstrainedManifold({x}, {EqualityFactor({x}, 2, f)}, {}), PreconditionError);
}

TEST(CmcProperty, BasisIsOrthonormalAndTangent) {
  std::mt19937_64 rng(21);
  const ConstrainedManifold hs = half_sphere();
  const ConstrainedManifold bottom = fixtures::first_manifold(corner_manifold_problems().bottom);
  const HopperProblem hop = hopper_problem();
  const ConstrainedManifold stance =
      fixtures::hopper_step_manifold(hop, fixtures::hopper_free_stance_step(hop.params));

  for (int i = 0; i < 40; ++i) {
    for (const auto* m : {&hs, &bottom, &stance}) {
      Vector p;
      if (m == &hs) p = fixtures::half_sphere_point(rng, i % 2 == 0);
      if (m == &bottom) p = fixtures::corner_bottom_point(rng, i % 2 == 0);
      if (m == &stance) p = fixtures::hopper_stance_point(hop.params, rng);
      const TangentBasis b = tangent_basis(*m, p);
      EXPECT_EQ(b.dim(), m->intrinsic_dim());
      EXPECT_LT((b.basis.transpose() * b.basis - Matrix::Identity(b.dim(), b.dim())).lpNorm<Eigen::Infinity>(), 1e-12);
      if (m->num_equalities() > 0) {
        EXPECT_LT((m->equality_jacobian(p) * b.basis).lpNorm<Eigen::Infinity>(), 1e-10);
      }
      const CornerDims d = corner_model_dims(*m, p);
      EXPECT_LE(0, d.m);
      EXPECT_LE(d.m, d.n);
      EXPECT_LE(d.n, m->ambient_dim());
    }
  }
}

TEST(CmcProperty, CornerAlignedBasisGivesTheModelCorner) {
  ManifoldOptions opt;
  opt.basis_mode = BasisMode::kCornerAligned;
  const Problem p = corner_manifold_problems().bottom;
  const ConstrainedManifold aligned = ConstrainedManifold::from_component(
      p.graph, p.graph.extract_components().components.at(0), opt);
  const Vector x = bottom_corner();
  const TangentBasis b = tangent_basis(aligned, x);
  EXPECT_LT((b.basis.transpose() * b.basis - Matrix::Identity(2, 2)).norm(), 1e-12);
  // Only the first |active| coordinates enter the cone constraints.
  ASSERT_EQ(b.cone_rows.rows(), 2);
  EXPECT_LT(b.cone_rows.rightCols(b.dim() - 2).norm(), 1e-14);
}

TEST(CmcProperty, ConeDirectionsAreVelocitiesOfFeasibleCurves) {
  std::mt19937_64 rng(22);
  const ConstrainedManifold hs = half_sphere();
  const ConstrainedManifold bottom = fixtures::first_manifold(corner_manifold_problems().bottom);
  for (int i = 0; i < 20; ++i) {
    const bool hs_case = i % 2 == 0;
    const ConstrainedManifold& m = hs_case ? hs : bottom;
    const Vector x = hs_case ? Vector(fixtures::half_sphere_point(rng, true)) : bottom_corner();
    const TangentBasis b = tangent_basis(m, x);
    const Vector v = b.basis * fixtures::cone_direction(b, rng);
    for (double t : {1e-1, 1e-2, 1e-3}) {
      const Vector c = retract(m, x, t * v);
      EXPECT_LE(m.equality_values(c).lpNorm<Eigen::Infinity>(), 1e-10);
      EXPECT_GE(m.inequality_values(c).minCoeff(), -1e-10);
      // the curve leaves x with velocity v
      EXPECT_LT((c - x - t * v).norm(), 5.0 * t * t);
    }
  }
}

}  // namespace
}  // namespace cmcopt
