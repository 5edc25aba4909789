#pragma once

#include "cmcopt/cmc.hpp"
#include "cmcopt/cone_qp.hpp"
#include "cmcopt/types.hpp"

namespace cmcopt {

/// Pull-back of an ambient cost gradient into basis coordinates: B^T grad.
Vector differential(const TangentBasis& basis, const Vector& ambient_cost_gradient);

/// First-order picture of a cost at one point of a manifold.
///
/// `projected_theta` is the feasible steepest-descent direction in basis
/// coordinates, i.e. the projection of -euclidean_coeffs onto the tangent
/// cone, and `ambient_grad` is its ambient image B * projected_theta. Both are
/// zero exactly at constrained-stationary points. `multipliers` are the
/// projection's KKT multipliers, one per active inequality row; at a stationary
/// corner they are the inequality Lagrange multipliers and are nonnegative.
struct ManifoldGradient {
  TangentBasis basis;
  Vector euclidean_coeffs;
  Vector projected_theta;
  Vector ambient_grad;
  Vector multipliers;
  std::vector<int> working_set;  // cone rows (indices into basis.active.active) held tight

  double norm() const { return projected_theta.norm(); }
};

ManifoldGradient riemannian_gradient(const ConstrainedManifold& manifold, const Vector& x,
                                     const Vector& ambient_cost_gradient);

/// Same as above with a precomputed basis.
ManifoldGradient riemannian_gradient(const TangentBasis& basis, const Vector& ambient_cost_gradient);

}  // namespace cmcopt
