#pragma once

#include <span>
#include <vector>

#include "cmcopt/types.hpp"

namespace cmcopt {

struct ConeQpOptions {
  int max_iterations = 0;  // 0: 50 + 10 * (rows + dim)
  double step_tol = 1e-13;
  double multiplier_tol = 1e-12;
};

struct ConeQpResult {
  Vector theta;
  Vector multipliers;        // one per cone row; zero off the working set
  std::vector<int> working_set;  // rows held at equality, ascending
  int iterations = 0;
};

/// Primal active-set solver for
///   min 0.5 theta^T H theta + linear^T theta   s.t.  cone_rows * theta >= 0
/// with H symmetric positive definite. Starts from theta = 0 (always feasible);
/// `warm_start` seeds the working set. Blocking and dropping ties are broken
/// by the smallest row index. Throws QpError on the iteration cap.
ConeQpResult solve_cone_qp(const Matrix& hessian, const Vector& linear, const Matrix& cone_rows,
                           std::span<const int> warm_start = {}, const ConeQpOptions& options = {});

/// Same solver for  cone_rows * theta >= lower  with lower <= 0, so theta = 0
/// stays feasible. Rows with lower == 0 are the cone; the others are
/// linearized constraints that are not yet binding.
ConeQpResult solve_cone_qp(const Matrix& hessian, const Vector& linear, const Matrix& cone_rows,
                           const Vector& lower, std::span<const int> warm_start = {},
                           const ConeQpOptions& options = {});

/// Euclidean projection of `point` onto { theta : cone_rows * theta >= 0 }.
ConeQpResult project_to_cone(const Vector& point, const Matrix& cone_rows,
                             std::span<const int> warm_start = {}, const ConeQpOptions& options = {});

}  // namespace cmcopt
