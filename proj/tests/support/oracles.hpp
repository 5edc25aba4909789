#pragma once

// Reference computations used only by tests. None of them calls the
// library's QP, tangent-basis or retraction code.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace cmcopt::oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Exact projection onto { t : A t >= 0 } by enumerating row subsets S:
/// project onto null(A_S), keep feasible candidates, return the closest.
Vec cone_projection_enumerate(const Vec& point, const Mat& rows, double feas_tol = 1e-12);

/// Dykstra's alternating projections onto the half-spaces a_i^T t >= 0.
Vec cone_projection_dykstra(const Vec& point, const Mat& rows, int sweeps = 20000);

/// Minimizer of `cost` over { |X| = 1, z >= z_min } by a spherical grid and
/// successive zoomed grids around the incumbent.
Eigen::Vector3d sphere_grid_minimize(const std::function<double(const Eigen::Vector3d&)>& cost,
                                     double z_min = 0.0, int grid = 400, int refinements = 30);

/// Root of a continuous function on [lo, hi] with a sign change, by bisection.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-15);

/// One-sided second-order difference (-3f(0) + 4f(h) - f(2h)) / (2h).
double forward_derivative(const std::function<double(double)>& f, double h);
/// Central difference (f(h) - f(-h)) / (2h).
double central_derivative(const std::function<double(double)>& f, double h);

/// Least-squares slope of log(err) against log(t).
double loglog_slope(const std::vector<double>& t, const std::vector<double>& err);

/// Orthonormal basis of null(M) from a full SVD.
Mat nullspace(const Mat& m, double rtol = 1e-10);

/// Quadratic-penalty minimizer of (x-a)^2 + (y-b)^2 + mu (x+y-1)^2; returns
/// the constraint residual x + y - 1 at the minimizer.
double penalty_residual_closed_form(double a, double b, double mu);

}  // namespace cmcopt::oracle
