#include "cmcopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cmcopt/errors.hpp"
#include "manifold_set.hpp"

namespace cmcopt {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIters:
      return "max_iters";
    case SolveStatus::kRetractionFailure:
      return "retraction_failure";
    case SolveStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

int search_dimension(const FactorGraph& graph, const ComponentPartition& partition) {
  return detail::ManifoldSet(graph, partition, {}).search_dimension();
}

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  Recorder(SolveResult& result, const IterationSink& sink, int log_every)
      : result_(result), sink_(sink), log_every_(std::max(1, log_every)), start_(Clock::now()) {}

  void emit(int iter, double cost, double violation, double grad_norm, double step, bool accepted) {
    IterationRecord rec;
    rec.iter = iter;
    rec.cost = cost;
    rec.violation = violation;
    rec.grad_norm = grad_norm;
    rec.step = step;
    rec.accepted = accepted;
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    result_.history.push_back(rec);
    if (sink_ && iter % log_every_ == 0) sink_(rec);
  }

 private:
  SolveResult& result_;
  const IterationSink& sink_;
  int log_every_;
  Clock::time_point start_;
};

double relative_decrease(double before, double after) {
  return (before - after) / std::max(std::abs(before), 1.0);
}

void finish(SolveResult& result, const FactorGraph& graph, const Values& values,
            const detail::ViolationFn& violation) {
  result.final_values = values;
  result.final_cost = graph.total_cost(values);
  result.final_violation = violation(values);
}

// Feasible start on every manifold; false (with status set) when a projection fails.
bool initial_projection(const detail::ManifoldSet& set, const Values& init, const SolverConfig& config,
                        std::vector<Vector>& points, SolveResult& result) {
  try {
    points = set.project(init, config.retraction);
    return true;
  } catch (const RetractionError& e) {
    result.status = SolveStatus::kRetractionFailure;
    result.message = std::string("initial projection failed: ") + e.what();
    result.final_values = init;
    return false;
  }
}

// Cost differences below this are rounding noise; steps whose predicted
// decrease falls under it are judged by the projected gradient instead.
constexpr double kNoiseGradRatio = 0.9;

double noise_floor(double cost) { return 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(cost), 1.0); }

double projected_gradient_norm(const detail::ManifoldSet& set, const FactorGraph& graph,
                               const std::vector<Vector>& points) {
  const std::vector<Vector> grads = set.cost_gradients(graph, set.scatter(points));
  double worst = 0.0;
  for (int i = 0; i < set.size(); ++i) {
    worst = std::max(worst, riemannian_gradient(set[i], points[i], grads[i]).norm());
  }
  return worst;
}

double max_norm(const std::vector<Vector>& blocks) {
  double worst = 0.0;
  for (const auto& b : blocks) worst = std::max(worst, b.norm());
  return worst;
}

// Curvature the binding constraints add to the cost along the manifold,
// -B^T (sum_i lambda_i Hess c_i) B, with least-squares multipliers from
// grad = dc^T lambda. Constraint Hessians come from central differences of
// the Jacobian along the basis columns. Only the positive semidefinite part
// is kept so the damped model stays convex.
Matrix constraint_curvature(const ConstrainedManifold& m, const TangentBasis& basis, const Vector& grad) {
  const int n = basis.dim();
  const int neq = m.num_equalities();
  const std::vector<int>& active = basis.active.active;
  const int rows = neq + static_cast<int>(active.size());
  if (rows == 0 || n == 0) return Matrix::Zero(n, n);

  const auto binding_jacobian = [&](const Vector& x) {
    Matrix j(rows, m.ambient_dim());
    if (neq > 0) j.topRows(neq) = m.equality_jacobian(x);
    if (!active.empty()) j.bottomRows(rows - neq) = m.inequality_jacobian(x)(active, Eigen::all);
    return j;
  };
  const Vector& x = basis.base;
  const Vector lambda = binding_jacobian(x).transpose().colPivHouseholderQr().solve(grad);
  if (lambda.lpNorm<Eigen::Infinity>() == 0.0) return Matrix::Zero(n, n);

  const double h = 1e-5 * (1.0 + x.lpNorm<Eigen::Infinity>());
  Matrix weighted(m.ambient_dim(), n);
  for (int j = 0; j < n; ++j) {
    const Vector b = basis.basis.col(j);
    weighted.col(j) = (binding_jacobian(x + h * b) - binding_jacobian(x - h * b)).transpose() * lambda / (2.0 * h);
  }
  Matrix w = -basis.basis.transpose() * weighted;
  w = 0.5 * (w + w.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w);
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

SolveResult solve_rgd(const FactorGraph& graph, const ComponentPartition& partition, const Values& init,
                      const SolverConfig& config, const IterationSink& sink) {
  const detail::ViolationFn violation = [&graph](const Values& v) { return graph.total_violation(v); };
  const detail::ManifoldSet set(graph, partition, config.manifold);

  SolveResult result;
  result.dimension = set.search_dimension();
  Recorder recorder(result, sink, config.log_every);

  std::vector<Vector> points;
  if (!initial_projection(set, init, config, points, result)) return result;
  Values values = set.scatter(points);
  double cost = graph.total_cost(values);

  bool any_accepted = false;
  double last_rel = std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    // (a) differential and (b) feasible descent direction per manifold.
    const std::vector<Vector> grads = set.cost_gradients(graph, values);
    std::vector<Vector> directions(set.size());
    double grad_norm = 0.0;
    double grad_sq = 0.0;
    for (int i = 0; i < set.size(); ++i) {
      const ManifoldGradient mg = riemannian_gradient(set[i], points[i], grads[i]);
      directions[i] = mg.ambient_grad;
      grad_norm = std::max(grad_norm, mg.norm());
      grad_sq += mg.projected_theta.squaredNorm();
    }
    if (iter == 0) recorder.emit(0, cost, violation(values), grad_norm, 0.0, true);

    if (grad_norm <= config.grad_tol && (!any_accepted || last_rel <= config.rel_cost_tol)) {
      result.status = SolveStatus::kConverged;
      break;
    }
    if (iter >= config.max_iters) {
      result.status = SolveStatus::kMaxIters;
      break;
    }

    // (c) step size by backtracking; (d) retraction on every manifold.
    const double longest = max_norm(directions);
    double alpha = config.step_init;
    if (alpha * longest > config.trust_radius_max) alpha = config.trust_radius_max / longest;
    bool accepted = false;
    bool any_retraction = false;
    std::vector<Vector> trial(set.size());
    double trial_cost = cost;
    for (; alpha >= config.min_step; alpha *= config.shrink) {
      try {
        for (int i = 0; i < set.size(); ++i) {
          trial[i] = retract(set[i], points[i], alpha * directions[i], config.retraction);
        }
      } catch (const RetractionError&) {
        continue;
      }
      any_retraction = true;
      trial_cost = graph.total_cost(set.scatter(trial));
      const double required = config.armijo_c * alpha * grad_sq;
      if (required > noise_floor(cost)) {
        accepted = trial_cost <= cost - required;
      } else {
        accepted = trial_cost <= cost + noise_floor(cost) &&
                   projected_gradient_norm(set, graph, trial) <= kNoiseGradRatio * grad_norm;
      }
      if (accepted) break;
    }
    if (!accepted) {
      if (grad_norm <= config.grad_tol) {
        result.status = SolveStatus::kConverged;
      } else {
        result.status = any_retraction ? SolveStatus::kStalled : SolveStatus::kRetractionFailure;
        result.message = "line search exhausted";
      }
      break;
    }

    last_rel = relative_decrease(cost, trial_cost);
    any_accepted = true;
    points = std::move(trial);
    trial.clear();
    values = set.scatter(points);
    cost = trial_cost;
    recorder.emit(iter + 1, cost, violation(values), grad_norm, alpha * longest, true);
  }

  finish(result, graph, values, violation);
  return result;
}

namespace detail {

SolveResult solve_lm(const FactorGraph& graph, const ComponentPartition& partition, const Values& init,
                     const SolverConfig& config, const IterationSink& sink, const ViolationFn& violation) {
  const ManifoldSet set(graph, partition, config.manifold);

  SolveResult result;
  result.dimension = set.search_dimension();
  Recorder recorder(result, sink, config.log_every);

  std::vector<Vector> points;
  if (!initial_projection(set, init, config, points, result)) return result;
  Values values = set.scatter(points);

  double damping = config.damping_init;
  double radius = config.trust_radius_init;
  bool any_accepted = false;
  double last_rel = std::numeric_limits<double>::infinity();

  std::vector<TangentBasis> bases(set.size());
  std::vector<int> offsets(set.size());
  ThetaModel model;
  Matrix curvature;
  Matrix cone;
  Matrix rows;   // cone rows, then linearized inactive inequalities
  Vector lower;  // 0 on cone rows, -g on inactive rows
  std::vector<int> warm;
  double grad_norm = 0.0;
  bool relinearize = true;

  for (int iter = 0;; ++iter) {
    if (relinearize) {
      int total = 0;
      int cone_total = 0;
      for (int i = 0; i < set.size(); ++i) {
        bases[i] = tangent_basis(set[i], points[i]);
        offsets[i] = total;
        total += bases[i].dim();
        cone_total += static_cast<int>(bases[i].cone_rows.rows());
      }
      model = build_theta_model(graph, values, set, bases, offsets);
      curvature = Matrix::Zero(total, total);
      const std::vector<Vector> grads = set.cost_gradients(graph, values);
      for (int i = 0; i < set.size(); ++i) {
        const int d = bases[i].dim();
        curvature.block(offsets[i], offsets[i], d, d) = constraint_curvature(set[i], bases[i], grads[i]);
      }
      cone = Matrix::Zero(cone_total, total);
      grad_norm = 0.0;
      int row = 0;
      for (int i = 0; i < set.size(); ++i) {
        const int k = static_cast<int>(bases[i].cone_rows.rows());
        const Vector g = model.gradient.segment(offsets[i], bases[i].dim());
        if (k > 0) {
          cone.block(row, offsets[i], k, bases[i].dim()) = bases[i].cone_rows;
          grad_norm = std::max(grad_norm, project_to_cone(-g, bases[i].cone_rows).theta.norm());
        } else {
          grad_norm = std::max(grad_norm, g.norm());
        }
        row += k;
      }
      int inactive_total = 0;
      for (int i = 0; i < set.size(); ++i) inactive_total += static_cast<int>(bases[i].active.inactive.size());
      rows = Matrix::Zero(cone_total + inactive_total, total);
      lower = Vector::Zero(cone_total + inactive_total);
      rows.topRows(cone_total) = cone;
      row = cone_total;
      for (int i = 0; i < set.size(); ++i) {
        const auto& inactive = bases[i].active.inactive;
        if (inactive.empty()) continue;
        const Vector g = set[i].inequality_values(points[i]);
        const Matrix dg = set[i].inequality_jacobian(points[i]);
        for (int l : inactive) {
          rows.block(row, offsets[i], 1, bases[i].dim()) = dg.row(l) * bases[i].basis;
          lower[row] = -g[l];
          ++row;
        }
      }
      warm.clear();
      relinearize = false;
      if (iter == 0) recorder.emit(0, model.cost, violation(values), grad_norm, 0.0, true);
      if (grad_norm <= config.grad_tol && (!any_accepted || last_rel <= config.rel_cost_tol)) {
        result.status = SolveStatus::kConverged;
        break;
      }
    }
    if (iter >= config.max_iters) {
      result.status = SolveStatus::kMaxIters;
      break;
    }

    const int total = static_cast<int>(model.gradient.size());
    Matrix hessian = 2.0 * model.jacobian.transpose() * model.jacobian + curvature;
    hessian.diagonal().array() += damping;
    const ConeQpResult qp = solve_cone_qp(hessian, model.gradient, rows, lower, warm);
    warm = qp.working_set;
    Vector delta = qp.theta;

    std::vector<Vector> steps(set.size());
    double longest = 0.0;
    for (int i = 0; i < set.size(); ++i) {
      steps[i] = bases[i].basis * delta.segment(offsets[i], bases[i].dim());
      longest = std::max(longest, steps[i].norm());
    }
    if (longest > radius) {
      const double s = radius / longest;
      delta *= s;
      for (auto& step : steps) step *= s;
      longest = radius;
    }

    const double predicted =
        -(model.gradient.dot(delta) + (model.jacobian * delta).squaredNorm() + 0.5 * delta.dot(curvature * delta));
    if (total == 0 || std::isnan(predicted)) {
      result.status = grad_norm <= config.grad_tol ? SolveStatus::kConverged : SolveStatus::kStalled;
      if (result.status == SolveStatus::kStalled) result.message = "model predicts no decrease";
      break;
    }
    const double floor = noise_floor(model.cost);
    // No step can change the cost by more than its resolution, so the
    // relative-decrease test holds for any further step.
    if (predicted <= floor && grad_norm <= config.grad_tol) {
      result.status = SolveStatus::kConverged;
      break;
    }

    bool ok = true;
    std::vector<Vector> trial(set.size());
    try {
      for (int i = 0; i < set.size(); ++i) trial[i] = retract(set[i], points[i], steps[i], config.retraction);
    } catch (const RetractionError&) {
      ok = false;
    }

    double trial_cost = model.cost;
    double rho = -1.0;
    if (ok) {
      trial_cost = graph.total_cost(set.scatter(trial));
      rho = (model.cost - trial_cost) / predicted;
    }
    if (predicted <= floor) {
      // Below cost resolution: accept on a smaller projected gradient, else stop.
      if (ok && trial_cost <= model.cost + floor && projected_gradient_norm(set, graph, trial) <= kNoiseGradRatio * grad_norm) {
        rho = 0.5;
      } else {
        result.status = grad_norm <= config.grad_tol ? SolveStatus::kConverged
                        : ok                         ? SolveStatus::kStalled
                                                     : SolveStatus::kRetractionFailure;
        result.message = "cost resolution reached";
        break;
      }
    }

    if (rho > 0.0) {
      last_rel = relative_decrease(model.cost, trial_cost);
      any_accepted = true;
      points = std::move(trial);
      values = set.scatter(points);
      relinearize = true;
      if (rho < 0.25) {
        damping = std::min(damping * 4.0, config.damping_max);
      } else if (rho > 0.75) {
        damping = std::max(damping * 0.5, config.damping_min);
        radius = std::min(std::max(radius, 2.0 * longest), config.trust_radius_max);
      }
      recorder.emit(iter + 1, trial_cost, violation(values), grad_norm, longest, true);
    } else {
      damping *= 4.0;
      radius = std::max(0.5 * longest, config.trust_radius_min);
      recorder.emit(iter + 1, model.cost, violation(values), grad_norm, longest, false);
      if (damping > config.damping_max || longest <= config.trust_radius_min) {
        result.status = grad_norm <= config.grad_tol ? SolveStatus::kConverged
                        : ok                         ? SolveStatus::kStalled
                                                     : SolveStatus::kRetractionFailure;
        result.message = "damping exhausted";
        break;
      }
    }
  }

  finish(result, graph, values, violation);
  return result;
}

}  // namespace detail

SolveResult solve_lm(const FactorGraph& graph, const ComponentPartition& partition, const Values& init,
                     const SolverConfig& config, const IterationSink& sink) {
  return detail::solve_lm(graph, partition, init, config, sink,
                          [&graph](const Values& v) { return graph.total_violation(v); });
}

StationarityReport check_stationarity(const FactorGraph& graph, const ComponentPartition& partition,
                                      const Values& values, double tol, const ManifoldOptions& options) {
  const detail::ManifoldSet set(graph, partition, options);
  const std::vector<Vector> points = set.gather(values);
  const std::vector<Vector> grads = set.cost_gradients(graph, values);

  StationarityReport report;
  report.min_multiplier = std::numeric_limits<double>::infinity();
  for (int i = 0; i < set.size(); ++i) {
    const ManifoldGradient mg = riemannian_gradient(set[i], points[i], grads[i]);
    ManifoldStationarity entry;
    entry.keys = set[i].keys();
    entry.grad_norm = mg.norm();
    entry.active_rows = mg.basis.active.active;
    entry.qp_multipliers = mg.multipliers;

    // grad f = dh^T lambda + dg_A^T mu, solved in the least-squares sense so
    // that the sign of mu is informative away from stationarity.
    const int n_h = set[i].num_equalities();
    const int n_a = static_cast<int>(entry.active_rows.size());
    Matrix jac(n_h + n_a, set[i].ambient_dim());
    if (n_h > 0) jac.topRows(n_h) = set[i].equality_jacobian(points[i]);
    if (n_a > 0) jac.bottomRows(n_a) = set[i].inequality_jacobian(points[i])(entry.active_rows, Eigen::all);
    Vector mult = Vector::Zero(n_h + n_a);
    if (n_h + n_a > 0) mult = jac.transpose().colPivHouseholderQr().solve(grads[i]);
    entry.equality_multipliers = mult.head(n_h);
    entry.inequality_multipliers = mult.tail(n_a);

    report.max_grad_norm = std::max(report.max_grad_norm, entry.grad_norm);
    if (n_a > 0) report.min_multiplier = std::min(report.min_multiplier, entry.inequality_multipliers.minCoeff());
    report.manifolds.push_back(std::move(entry));
  }
  if (!std::isfinite(report.min_multiplier)) report.min_multiplier = 0.0;
  report.pass = report.max_grad_norm <= tol && report.min_multiplier >= -tol;
  return report;
}

}  // namespace cmcopt
