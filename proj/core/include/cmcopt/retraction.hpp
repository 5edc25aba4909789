#pragma once

#include "cmcopt/cmc.hpp"
#include "cmcopt/types.hpp"

namespace cmcopt {

struct RetractionOptions {
  double feasibility_tol = 1e-10;  // |h|_inf and max(0,-g) at the returned point
  double kkt_tol = 1e-10;          // target first-order residual
  double accept_kkt_tol = 1e-8;    // residual still accepted when the caps are hit
  double tangent_tol = 1e-8;       // retract() precondition on v
  int max_outer = 50;              // augmented-Lagrangian multiplier updates
  int max_inner = 100;             // Gauss-Newton steps per multiplier update
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e8;
  int max_polish = 30;
};

/// Solution of  min_Y 0.5 |Y - target|^2  s.t.  h(Y) = 0, g(Y) >= 0.
/// Multipliers follow  (Y - target) + dh^T eq_multipliers - dg^T ineq_multipliers = 0.
struct ProjectionResult {
  Vector point;
  Vector eq_multipliers;
  Vector ineq_multipliers;
  double kkt_residual = 0.0;
  double violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool polished = false;
};

/// Augmented-Lagrangian solve of the metric projection, warm-started at
/// `start`, followed by Gauss-Newton iterations on the KKT system of the
/// identified active rows. Throws RetractionError carrying the best iterate.
ProjectionResult metric_projection(const ConstrainedManifold& manifold, const Vector& target,
                                   const Vector& start, const RetractionOptions& options = {});

/// R_x(v): metric projection of x + v. Returns x itself when v == 0.
/// Throws PreconditionError if v is outside the tangent cone at x.
Vector retract(const ConstrainedManifold& manifold, const Vector& x, const Vector& v,
               const RetractionOptions& options = {});

/// Metric projection of an arbitrary guess; feasible guesses come back unchanged.
Vector project_feasible(const ConstrainedManifold& manifold, const Vector& guess,
                        const RetractionOptions& options = {});

}  // namespace cmcopt
