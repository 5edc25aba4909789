#pragma once

#include "cmcopt/graph.hpp"
#include "cmcopt/optimizer.hpp"

namespace cmcopt {

/// Outer-loop settings shared by the comparison solvers. Every outer
/// iteration runs the Levenberg-Marquardt solver with `inner` to convergence
/// (or its iteration cap), then multiplies the penalty weight by `penalty_growth`.
struct BaselineConfig {
  SolverConfig inner;
  int outer_iters = 8;
  double penalty_init = 1.0;
  double penalty_growth = 10.0;
};

/// Quadratic penalty: minimizes cost + mu (|h|^2 + |min(g, 0)|^2) over R^N.
SolveResult solve_penalty(const FactorGraph& graph, const Values& init, const BaselineConfig& config = {},
                          const IterationSink& sink = {});

/// Augmented Lagrangian with the same penalty schedule plus first-order
/// multiplier updates; inequality multipliers are clipped at zero.
SolveResult solve_auglag(const FactorGraph& graph, const Values& init, const BaselineConfig& config = {},
                         const IterationSink& sink = {});

/// Equality-only constraint manifolds; inequalities become hinge-squared
/// penalty costs on the same schedule. With no inequalities this is exactly
/// one solve_lm call.
SolveResult solve_cmopt(const FactorGraph& graph, const Values& init, const BaselineConfig& config = {},
                        const IterationSink& sink = {});

}  // namespace cmcopt
