#include "cmcopt/retraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmcopt/errors.hpp"

namespace cmcopt {

namespace {

struct Linearization {
  Vector h, g;
  Matrix jh, jg;
};

Linearization linearize(const ConstrainedManifold& m, const Vector& y) {
  Linearization lin;
  lin.h = m.num_equalities() > 0 ? m.equality_values(y) : Vector(0);
  lin.g = m.num_inequalities() > 0 ? m.inequality_values(y) : Vector(0);
  lin.jh = m.num_equalities() > 0 ? m.equality_jacobian(y) : Matrix(0, y.size());
  lin.jg = m.num_inequalities() > 0 ? m.inequality_jacobian(y) : Matrix(0, y.size());
  return lin;
}

double infeasibility(const Vector& h, const Vector& g) {
  double v = h.size() > 0 ? h.lpNorm<Eigen::Infinity>() : 0.0;
  if (g.size() > 0) v = std::max(v, (-g).cwiseMax(0.0).maxCoeff());
  return v;
}

double kkt_residual(const Linearization& lin, const Vector& y, const Vector& target, const Vector& lambda,
                    const Vector& nu) {
  Vector r = y - target;
  if (lin.h.size() > 0) r += lin.jh.transpose() * lambda;
  if (lin.g.size() > 0) r -= lin.jg.transpose() * nu;
  return r.lpNorm<Eigen::Infinity>();
}

// Augmented Lagrangian merit for fixed (lambda, nu, mu), sum-of-squares form.
double merit(const ConstrainedManifold& m, const Vector& y, const Vector& target, const Vector& lambda,
             const Vector& nu, double mu) {
  double phi = 0.5 * (y - target).squaredNorm();
  if (m.num_equalities() > 0) phi += 0.5 * mu * (m.equality_values(y) + lambda / mu).squaredNorm();
  if (m.num_inequalities() > 0) {
    phi += 0.5 * mu * (m.inequality_values(y) - nu / mu).cwiseMin(0.0).squaredNorm();
  }
  return phi;
}

struct Candidate {
  Vector y, lambda, nu;
  double violation = std::numeric_limits<double>::infinity();
  double kkt = std::numeric_limits<double>::infinity();

  bool better_than(const Candidate& other) const {
    if (violation != other.violation) return violation < other.violation;
    return kkt < other.kkt;
  }
};

// Newton-type cleanup on the rows the AL solve identified as binding:
// iterate Y <- target - J^T l with J (Y_new - Y) = -c(Y).
bool polish(const ConstrainedManifold& m, const Vector& target, const RetractionOptions& opt,
            Candidate& cand) {
  std::vector<int> rows;
  if (m.num_inequalities() > 0) {
    const Vector g = m.inequality_values(cand.y);
    for (int l = 0; l < g.size(); ++l) {
      if (cand.nu[l] > 0.0 || g[l] < 0.0) rows.push_back(l);
    }
  }
  const int n_h = m.num_equalities();
  const int n_c = n_h + static_cast<int>(rows.size());
  if (n_c == 0) return false;

  Vector y = cand.y;
  Vector stacked_mult;
  for (int it = 0; it < opt.max_polish; ++it) {
    Linearization lin = linearize(m, y);
    Matrix jc(n_c, y.size());
    Vector c(n_c);
    if (n_h > 0) {
      jc.topRows(n_h) = lin.jh;
      c.head(n_h) = lin.h;
    }
    if (!rows.empty()) {
      jc.bottomRows(n_c - n_h) = lin.jg(rows, Eigen::all);
      c.tail(n_c - n_h) = lin.g(rows);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(jc.transpose());
    qr.setThreshold(1e-12);
    if (qr.rank() < n_c) return false;
    const Matrix gram = jc * jc.transpose();
    stacked_mult = gram.ldlt().solve(c - jc * (y - target));
    const Vector d = -(y - target) - jc.transpose() * stacked_mult;
    y += d;
    if (d.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + y.lpNorm<Eigen::Infinity>()) &&
        c.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
      break;
    }
  }

  Candidate out;
  out.y = y;
  out.lambda = stacked_mult.head(n_h);
  out.nu = Vector::Zero(m.num_inequalities());
  for (std::size_t i = 0; i < rows.size(); ++i) out.nu[rows[i]] = -stacked_mult[n_h + static_cast<int>(i)];
  if (out.nu.size() > 0 && out.nu.minCoeff() < -std::sqrt(opt.kkt_tol)) return false;
  out.nu = out.nu.cwiseMax(0.0);

  const Linearization lin = linearize(m, y);
  out.violation = infeasibility(lin.h, lin.g);
  out.kkt = kkt_residual(lin, y, target, out.lambda, out.nu);
  if (!std::isfinite(out.violation) || !std::isfinite(out.kkt)) return false;
  if (out.violation > std::max(cand.violation, opt.feasibility_tol)) return false;
  if (out.kkt > std::max(cand.kkt, opt.kkt_tol)) return false;
  cand = std::move(out);
  return true;
}

}  // namespace

ProjectionResult metric_projection(const ConstrainedManifold& m, const Vector& target, const Vector& start,
                                   const RetractionOptions& opt) {
  if (target.size() != m.ambient_dim() || start.size() != m.ambient_dim()) {
    throw PreconditionError("metric_projection: wrong dimension");
  }
  ProjectionResult result;
  if (m.is_euclidean()) {
    result.point = target;
    return result;
  }

  const int dim = m.ambient_dim();
  Vector y = start;
  Vector lambda = Vector::Zero(m.num_equalities());
  Vector nu = Vector::Zero(m.num_inequalities());
  double mu = opt.initial_penalty;
  const double inner_tol = 0.1 * opt.kkt_tol;

  Candidate best;
  Linearization lin = linearize(m, y);
  double prev_violation = infeasibility(lin.h, lin.g);

  bool converged = false;
  for (int outer = 0; outer < opt.max_outer && !converged; ++outer) {
    result.outer_iterations = outer + 1;
    for (int inner = 0; inner < opt.max_inner; ++inner) {
      lin = linearize(m, y);
      Vector grad = y - target;
      Matrix hess = Matrix::Identity(dim, dim);
      if (lin.h.size() > 0) {
        grad += mu * lin.jh.transpose() * (lin.h + lambda / mu);
        hess += mu * lin.jh.transpose() * lin.jh;
      }
      for (int l = 0; l < lin.g.size(); ++l) {
        const double shifted = lin.g[l] - nu[l] / mu;
        if (shifted < 0.0) {
          grad += mu * shifted * lin.jg.row(l).transpose();
          hess += mu * lin.jg.row(l).transpose() * lin.jg.row(l);
        }
      }
      if (grad.lpNorm<Eigen::Infinity>() <= inner_tol) break;
      ++result.inner_iterations;

      const Vector step = -hess.llt().solve(grad);
      const double phi0 = merit(m, y, target, lambda, nu, mu);
      const double slope = grad.dot(step);
      double t = 1.0;
      while (t > 1e-12 && merit(m, y + t * step, target, lambda, nu, mu) > phi0 + 1e-4 * t * slope) t *= 0.5;
      y += t * step;
      if ((t * step).lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + y.lpNorm<Eigen::Infinity>())) break;
    }

    lin = linearize(m, y);
    if (lin.h.size() > 0) lambda += mu * lin.h;
    if (lin.g.size() > 0) nu = (nu - mu * lin.g).cwiseMax(0.0);

    Candidate cand{y, lambda, nu, infeasibility(lin.h, lin.g), kkt_residual(lin, y, target, lambda, nu)};
    if (cand.violation <= opt.feasibility_tol && cand.kkt <= opt.kkt_tol) converged = true;
    if (best.y.size() == 0 || cand.better_than(best)) best = cand;
    if (cand.violation > 0.25 * prev_violation) mu = std::min(mu * opt.penalty_growth, opt.max_penalty);
    prev_violation = cand.violation;
  }

  if (converged) {
    // Keep the converged iterate, not merely the least-violating one.
    lin = linearize(m, y);
    best = Candidate{y, lambda, nu, infeasibility(lin.h, lin.g), kkt_residual(lin, y, target, lambda, nu)};
  }
  result.polished = polish(m, target, opt, best);

  result.point = best.y;
  result.eq_multipliers = best.lambda;
  result.ineq_multipliers = best.nu;
  result.kkt_residual = best.kkt;
  result.violation = best.violation;
  if (result.violation > opt.feasibility_tol || result.kkt_residual > opt.accept_kkt_tol) {
    std::ostringstream os;
    os << "metric projection did not converge: violation " << result.violation << ", KKT residual "
       << result.kkt_residual;
    throw RetractionError(os.str(), best.y, best.kkt, best.violation);
  }
  return result;
}

Vector retract(const ConstrainedManifold& m, const Vector& x, const Vector& v, const RetractionOptions& opt) {
  if (v.size() != m.ambient_dim() || x.size() != m.ambient_dim()) {
    throw PreconditionError("retract: wrong dimension");
  }
  if (v.squaredNorm() == 0.0) return x;
  if (m.is_euclidean()) return x + v;

  const double scale = opt.tangent_tol * (1.0 + v.norm());
  if (m.num_equalities() > 0 && (m.equality_jacobian(x) * v).lpNorm<Eigen::Infinity>() > scale) {
    throw PreconditionError("retract: step is not tangent to the equality constraints");
  }
  const ActiveSet active = classify_active(m, x);
  if (!active.interior()) {
    const Vector slope = m.inequality_jacobian(x)(active.active, Eigen::all) * v;
    if (slope.minCoeff() < -scale) {
      throw PreconditionError("retract: step leaves the tangent cone at an active inequality");
    }
  }

  const Vector target = x + v;
  if (m.violation(target) <= 1e-15 * (1.0 + target.lpNorm<Eigen::Infinity>())) return target;
  return metric_projection(m, target, target, opt).point;
}

Vector project_feasible(const ConstrainedManifold& m, const Vector& guess, const RetractionOptions& opt) {
  if (guess.size() != m.ambient_dim()) throw PreconditionError("project_feasible: wrong dimension");
  if (m.violation(guess) <= opt.feasibility_tol) return guess;
  return metric_projection(m, guess, guess, opt).point;
}

}  // namespace cmcopt
