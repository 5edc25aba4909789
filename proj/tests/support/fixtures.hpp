#pragma once

#include <random>
#include <vector>

#include "cmcopt/cmc.hpp"
#include "cmcopt/problems.hpp"
#include "cmcopt/retraction.hpp"

namespace cmcopt::fixtures {

/// Manifold of the first constraint-connected component of a problem.
ConstrainedManifold first_manifold(const Problem& problem);

/// Uniform random unit vector in R^n.
Vector unit_vector(int n, std::mt19937_64& rng);

/// Random point of the unit sphere with z >= 0 (strictly positive when interior).
Eigen::Vector3d half_sphere_point(std::mt19937_64& rng, bool boundary);

/// Random point of the unit sphere satisfying z >= 0 and z >= x^3 - 0.1.
Eigen::Vector3d corner_bottom_point(std::mt19937_64& rng, bool on_floor);

/// Stacked (p, v, a, f, c) of a feasible mid-stance hopper state with the
/// leg at full extension.
Vector hopper_stance_point(const HopperParams& params, std::mt19937_64& rng);

/// Index of a stance step of the default schedule that carries no boundary pins.
int hopper_free_stance_step(const HopperParams& params);

/// Component manifold of one stance step; its points stack like hopper_stance_point.
ConstrainedManifold hopper_step_manifold(const HopperProblem& hopper, int step);

/// Random theta with cone_rows * theta == 0 (the face of the active rows), unit ambient norm.
Vector face_direction(const TangentBasis& basis, std::mt19937_64& rng);

/// Random theta with cone_rows * theta >= 0 by rejection, unit ambient norm.
Vector cone_direction(const TangentBasis& basis, std::mt19937_64& rng);

/// Random k x n matrix with standard normal entries.
Matrix gaussian(int rows, int cols, std::mt19937_64& rng);

}  // namespace cmcopt::fixtures

namespace cmcopt::fixtures {

/// One manifold per constraint-connected component followed by one
/// Euclidean manifold per free variable.
std::vector<ConstrainedManifold> product_manifolds(const FactorGraph& graph);

/// Random feasible point: the initial guess plus Gaussian noise, projected
/// manifold by manifold.
Values random_feasible(const Problem& problem, const std::vector<ConstrainedManifold>& manifolds, double noise,
                       std::mt19937_64& rng);

}  // namespace cmcopt::fixtures
