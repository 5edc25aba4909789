#include <cmath>

#include <gtest/gtest.h>

#include "cmcopt/baselines.hpp"
#include "cmcopt/problems.hpp"
#include "oracles.hpp"

namespace cmcopt {
namespace {

struct LineInstance {
  FactorGraph graph;
  Values init;
  VariableKey x, y;
};

// (x - a)^2 + (y - b)^2 subject to x + y = 1.
LineInstance line_instance(double a, double b) {
  LineInstance s;
  s.x = s.graph.add_variable(1, "x");
  s.y = s.graph.add_variable(1, "y");
  s.graph.add_cost(CostFactor({s.x}, 1, [a](const Vector& v) { return Vector::Constant(1, v[0] - a); }));
  s.graph.add_cost(CostFactor({s.y}, 1, [b](const Vector& v) { return Vector::Constant(1, v[0] - b); }));
  s.graph.add_equality(EqualityFactor({s.x, s.y}, 1, [](const Vector& v) { return Vector::Constant(1, v.sum() - 1.0); }));
  s.init.insert(s.x, Vector::Constant(1, 0.0));
  s.init.insert(s.y, Vector::Constant(1, 0.0));
  return s;
}

double residual(const LineInstance& s, const Values& v) { return v.at(s.x)[0] + v.at(s.y)[0] - 1.0; }

TEST(Baselines, PenaltyMatchesClosedFormResidual) {
  const LineInstance s = line_instance(2.0, 3.0);
  for (int outer = 1; outer <= 4; ++outer) {
    BaselineConfig cfg;
    cfg.outer_iters = outer;
    const SolveResult r = solve_penalty(s.graph, s.init, cfg);
    const double mu = std::pow(cfg.penalty_growth, outer - 1) * cfg.penalty_init;
    EXPECT_NEAR(residual(s, r.final_values), oracle::penalty_residual_closed_form(2.0, 3.0, mu), 1e-9) << outer;
  }
}

TEST(Baselines, AugmentedLagrangianBeatsPenaltyOnViolation) {
  const LineInstance s = line_instance(2.0, 3.0);
  const SolveResult pen = solve_penalty(s.graph, s.init);
  const SolveResult al = solve_auglag(s.graph, s.init);
  EXPECT_LT(std::abs(residual(s, al.final_values)), std::abs(residual(s, pen.final_values)));
  EXPECT_LT(al.final_violation, 1e-10);
  EXPECT_NEAR(al.final_values.at(s.x)[0], 0.0, 1e-8);
  EXPECT_NEAR(al.final_values.at(s.y)[0], 1.0, 1e-8);
}

TEST(Baselines, UnconstrainedGraphReducesToLm) {
  const LineInstance s = line_instance(2.0, 3.0);
  const FactorGraph free = s.graph.without_constraints();
  const SolveResult lm = solve_lm(free, free.extract_components(), s.init);
  for (const SolveResult& r : {solve_penalty(free, s.init), solve_auglag(free, s.init), solve_cmopt(free, s.init)}) {
    EXPECT_NEAR(r.final_values.at(s.x)[0], 2.0, 1e-8);
    EXPECT_NEAR(r.final_values.at(s.y)[0], 3.0, 1e-8);
    EXPECT_NEAR(r.final_cost, lm.final_cost, 1e-14);
  }
}

TEST(Baselines, CmOptWithoutInequalitiesIsOneLmSolve) {
  const Problem p = half_sphere_problem();
  FactorGraph eq = p.graph.without_constraints();
  for (const auto& h : p.graph.equalities()) eq.add_equality(h);
  const SolveResult lm = solve_lm(eq, eq.extract_components(), p.initial);
  const SolveResult cm = solve_cmopt(eq, p.initial);
  ASSERT_EQ(cm.history.size(), lm.history.size());
  const auto x = p.graph.variables()[0];
  EXPECT_EQ(cm.final_values.at(x), lm.final_values.at(x));
  EXPECT_EQ(cm.dimension, lm.dimension);
}

TEST(Baselines, CmOptLeaksThroughTheInequalityBoundary) {
  // the unconstrained minimizer on the full sphere lies below z = 0
  const Problem p = half_sphere_problem();
  const SolveResult cm = solve_cmopt(p.graph, p.initial);
  const auto x = p.graph.variables()[0];
  EXPECT_LT(cm.final_values.at(x).z(), 0.0);
  EXPECT_GT(cm.final_violation, 0.0);
  EXPECT_LT(cm.final_violation, 1e-3);
  EXPECT_NEAR(cm.final_values.at(x).norm(), 1.0, 1e-10);
  EXPECT_EQ(cm.dimension, 2);
}

TEST(BaselinesProperty, PenaltyViolationDoesNotIncreaseWithOuterIterations) {
  for (const auto& name : {"half_sphere", "corner_top", "corner_pinned"}) {
    const Problem p = make_problem(name);
    double prev = std::numeric_limits<double>::infinity();
    for (int outer = 1; outer <= 6; ++outer) {
      BaselineConfig cfg;
      cfg.outer_iters = outer;
      const double v = solve_penalty(p.graph, p.initial, cfg).final_violation;
      EXPECT_LE(v, prev * (1.0 + 1e-9) + 1e-15) << name << " outer " << outer;
      prev = v;
    }
  }
}

TEST(BaselinesProperty, PenaltyAndAugLagSearchTheAmbientSpace) {
  for (const auto& name : problem_names()) {
    if (std::string(name) == "hopper") continue;
    const Problem p = make_problem(name);
    EXPECT_EQ(solve_penalty(p.graph, p.initial).dimension, p.graph.ambient_dim()) << name;
    EXPECT_EQ(solve_auglag(p.graph, p.initial).dimension, p.graph.ambient_dim()) << name;
  }
}

TEST(BaselinesProperty, HistoryIsConcatenatedWithIncreasingIterations) {
  const Problem p = make_problem("half_sphere");
  const SolveResult r = solve_auglag(p.graph, p.initial);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GT(r.history[i].iter, r.history[i - 1].iter);
  for (const auto& rec : r.history) EXPECT_GE(rec.violation, 0.0);
}

}  // namespace
}  // namespace cmcopt
