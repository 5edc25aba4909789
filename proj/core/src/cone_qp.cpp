#include "cmcopt/cone_qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cmcopt/errors.hpp"

namespace cmcopt {

namespace {

bool rows_independent(const Matrix& rows) {
  if (rows.rows() == 0) return true;
  Eigen::FullPivLU<Matrix> lu(rows);
  lu.setThreshold(1e-10);
  return lu.rank() == rows.rows();
}

}  // namespace

ConeQpResult solve_cone_qp(const Matrix& hessian, const Vector& linear, const Matrix& cone_rows,
                           std::span<const int> warm_start, const ConeQpOptions& options) {
  return solve_cone_qp(hessian, linear, cone_rows, Vector::Zero(cone_rows.rows()), warm_start, options);
}

ConeQpResult solve_cone_qp(const Matrix& hessian, const Vector& linear, const Matrix& cone_rows,
                           const Vector& lower, std::span<const int> warm_start, const ConeQpOptions& options) {
  const int n = static_cast<int>(linear.size());
  const int k = static_cast<int>(cone_rows.rows());
  if (hessian.rows() != n || hessian.cols() != n) throw PreconditionError("cone QP: Hessian shape");
  if (k > 0 && cone_rows.cols() != n) throw PreconditionError("cone QP: cone rows have wrong width");
  if (lower.size() != k) throw PreconditionError("cone QP: one lower bound per row");
  if (k > 0 && lower.maxCoeff() > 0.0) throw PreconditionError("cone QP: theta = 0 must be feasible");

  Eigen::LLT<Matrix> llt(hessian);
  if (llt.info() != Eigen::Success) throw PreconditionError("cone QP: Hessian is not positive definite");

  const Vector hinv_g = llt.solve(linear);
  const double scale = 1.0 + linear.lpNorm<Eigen::Infinity>();

  std::vector<int> working;
  for (int row : warm_start) {
    if (row < 0 || row >= k || std::find(working.begin(), working.end(), row) != working.end()) continue;
    std::vector<int> trial = working;
    trial.push_back(row);
    std::sort(trial.begin(), trial.end());
    if (rows_independent(cone_rows(trial, Eigen::all))) working = std::move(trial);
  }

  ConeQpResult result;
  result.theta = Vector::Zero(n);
  Vector mu;
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : 50 + 10 * (k + n);

  for (int iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter + 1;

    Vector target = -hinv_g;
    mu.resize(static_cast<int>(working.size()));
    if (!working.empty()) {
      const Matrix aw = cone_rows(working, Eigen::all);
      const Matrix hinv_at = llt.solve(aw.transpose());
      const Matrix schur = aw * hinv_at;
      mu = schur.ldlt().solve(aw * hinv_g + lower(working));
      target += hinv_at * mu;
    }
    const Vector p = target - result.theta;

    if (p.norm() <= options.step_tol * (1.0 + result.theta.norm())) {
      int drop = -1;
      for (std::size_t i = 0; i < working.size(); ++i) {
        if (mu[static_cast<int>(i)] < -options.multiplier_tol * scale) {
          drop = static_cast<int>(i);
          break;
        }
      }
      if (drop < 0) {
        result.theta = target;
        result.working_set = working;
        result.multipliers = Vector::Zero(k);
        for (std::size_t i = 0; i < working.size(); ++i) {
          result.multipliers[working[i]] = std::max(0.0, mu[static_cast<int>(i)]);
        }
        return result;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int j = 0; j < k; ++j) {
      if (std::binary_search(working.begin(), working.end(), j)) continue;
      const double slope = cone_rows.row(j).dot(p);
      if (slope >= -1e-14 * cone_rows.row(j).norm() * p.norm()) continue;
      const double ratio = std::max(0.0, (lower[j] - cone_rows.row(j).dot(result.theta)) / slope);
      if (ratio < alpha) {
        alpha = ratio;
        blocking = j;
      }
    }
    result.theta += alpha * p;
    if (blocking >= 0) {
      working.insert(std::upper_bound(working.begin(), working.end(), blocking), blocking);
    }
  }

  const Vector grad = hessian * result.theta + linear;
  std::ostringstream os;
  os << "cone QP did not converge in " << max_iter << " iterations";
  throw QpError(os.str(), grad.norm());
}

ConeQpResult project_to_cone(const Vector& point, const Matrix& cone_rows, std::span<const int> warm_start,
                             const ConeQpOptions& options) {
  const int n = static_cast<int>(point.size());
  return solve_cone_qp(Matrix::Identity(n, n), -point, cone_rows, warm_start, options);
}

}  // namespace cmcopt
