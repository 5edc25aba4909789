#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cmcopt/calculus.hpp"
#include "cmcopt/cmc.hpp"
#include "cmcopt/graph.hpp"
#include "cmcopt/retraction.hpp"

namespace cmcopt {

struct SolverConfig {
  int max_iters = 5000;
  double grad_tol = 1e-8;       // on max over manifolds of |theta*|
  double rel_cost_tol = 1e-12;  // last accepted relative cost decrease
  // Armijo backtracking (solve_rgd)
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double min_step = 1e-14;
  // trust region on the ambient step length of every manifold
  double trust_radius_init = 1.0;
  double trust_radius_min = 1e-12;
  double trust_radius_max = 1e3;
  // Levenberg-Marquardt damping (solve_lm)
  double damping_init = 1e-4;
  double damping_min = 1e-12;
  double damping_max = 1e12;
  int log_every = 1;

  ManifoldOptions manifold;
  RetractionOptions retraction;
};

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double violation = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  bool accepted = false;
  double wall_ms = 0.0;
};

enum class SolveStatus {
  kConverged,
  kMaxIters,
  kRetractionFailure,
  kStalled,  // no trial step decreases the cost and the gradient is above tolerance
};

std::string to_string(SolveStatus status);

struct SolveResult {
  Values final_values;
  std::vector<IterationRecord> history;
  SolveStatus status = SolveStatus::kMaxIters;
  int dimension = 0;  // search-space dimension
  double final_cost = 0.0;
  double final_violation = 0.0;
  std::string message;
};

using IterationSink = std::function<void(const IterationRecord&)>;

/// sum over components of (N_c - n_h) plus the free variable dimensions.
int search_dimension(const FactorGraph& graph, const ComponentPartition& partition);

/// Riemannian gradient descent with Armijo backtracking over the product of
/// component manifolds.
SolveResult solve_rgd(const FactorGraph& graph, const ComponentPartition& partition, const Values& init,
                      const SolverConfig& config = {}, const IterationSink& sink = {});

/// Levenberg-Marquardt on the product manifold: Gauss-Newton model pulled back
/// through the tangent bases, damped, minimized over the tangent cones, then
/// retracted and accepted on the actual/predicted reduction ratio.
SolveResult solve_lm(const FactorGraph& graph, const ComponentPartition& partition, const Values& init,
                     const SolverConfig& config = {}, const IterationSink& sink = {});

struct ManifoldStationarity {
  std::vector<VariableKey> keys;
  double grad_norm = 0.0;
  std::vector<int> active_rows;
  Vector inequality_multipliers;  // least-squares, one per active row; >= 0 at a KKT point
  Vector equality_multipliers;    // least-squares estimate
  Vector qp_multipliers;          // from the cone projection of the descent direction
};

struct StationarityReport {
  bool pass = true;
  double max_grad_norm = 0.0;
  double min_multiplier = 0.0;
  std::vector<ManifoldStationarity> manifolds;
};

StationarityReport check_stationarity(const FactorGraph& graph, const ComponentPartition& partition,
                                      const Values& values, double tol,
                                      const ManifoldOptions& options = {});

namespace detail {

/// Hook used by the baselines: the solver optimizes a penalized graph while
/// records report violation of the original one.
using ViolationFn = std::function<double(const Values&)>;

SolveResult solve_lm(const FactorGraph& graph, const ComponentPartition& partition, const Values& init,
                     const SolverConfig& config, const IterationSink& sink, const ViolationFn& violation);

}  // namespace detail

}  // namespace cmcopt
