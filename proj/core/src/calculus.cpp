#include "cmcopt/calculus.hpp"

#include "cmcopt/errors.hpp"

namespace cmcopt {

Vector differential(const TangentBasis& basis, const Vector& ambient_cost_gradient) {
  if (ambient_cost_gradient.size() != basis.basis.rows()) {
    throw PreconditionError("differential: gradient has size " + std::to_string(ambient_cost_gradient.size()) +
                            ", basis has " + std::to_string(basis.basis.rows()) + " rows");
  }
  return basis.basis.transpose() * ambient_cost_gradient;
}

ManifoldGradient riemannian_gradient(const TangentBasis& basis, const Vector& ambient_cost_gradient) {
  ManifoldGradient out;
  out.basis = basis;
  out.euclidean_coeffs = differential(basis, ambient_cost_gradient);
  if (basis.cone_rows.rows() == 0) {
    out.projected_theta = -out.euclidean_coeffs;
    out.multipliers = Vector(0);
  } else {
    ConeQpResult qp = project_to_cone(-out.euclidean_coeffs, basis.cone_rows);
    out.projected_theta = std::move(qp.theta);
    out.multipliers = std::move(qp.multipliers);
    out.working_set = std::move(qp.working_set);
  }
  out.ambient_grad = basis.basis * out.projected_theta;
  return out;
}

ManifoldGradient riemannian_gradient(const ConstrainedManifold& manifold, const Vector& x,
                                     const Vector& ambient_cost_gradient) {
  return riemannian_gradient(tangent_basis(manifold, x), ambient_cost_gradient);
}

}  // namespace cmcopt
