#include "manifold_set.hpp"

#include "cmcopt/errors.hpp"

namespace cmcopt::detail {

ManifoldSet::ManifoldSet(const FactorGraph& graph, const ComponentPartition& partition,
                         const ManifoldOptions& options)
    : locations_(graph.variables().size()) {
  for (const auto& component : partition.components) {
    manifolds_.push_back(ConstrainedManifold::from_component(graph, component, options));
  }
  for (const auto& key : partition.free_variables) {
    manifolds_.push_back(ConstrainedManifold::euclidean(key, options));
  }
  for (int i = 0; i < size(); ++i) {
    for (const auto& key : manifolds_[i].keys()) {
      locations_.at(key.id) = {i, manifolds_[i].offset_of(key)};
    }
  }
  for (const auto& loc : locations_) {
    if (loc.manifold < 0) throw PreconditionError("partition does not cover every variable");
  }
}

int ManifoldSet::search_dimension() const {
  int dim = 0;
  for (const auto& m : manifolds_) dim += m.intrinsic_dim();
  return dim;
}

std::vector<Vector> ManifoldSet::gather(const Values& values) const {
  std::vector<Vector> points;
  points.reserve(manifolds_.size());
  for (const auto& m : manifolds_) points.push_back(m.gather(values));
  return points;
}

Values ManifoldSet::scatter(const std::vector<Vector>& points) const {
  Values values;
  for (int i = 0; i < size(); ++i) manifolds_[i].scatter(points[i], values);
  return values;
}

std::vector<Vector> ManifoldSet::project(const Values& values, const RetractionOptions& options) const {
  std::vector<Vector> points = gather(values);
  for (int i = 0; i < size(); ++i) points[i] = project_feasible(manifolds_[i], points[i], options);
  return points;
}

std::vector<Vector> ManifoldSet::cost_gradients(const FactorGraph& graph, const Values& values) const {
  std::vector<Vector> grads;
  for (const auto& m : manifolds_) grads.push_back(Vector::Zero(m.ambient_dim()));
  for (const auto& f : graph.costs()) {
    const Vector g = f.gradient(f.stack(values));
    int offset = 0;
    for (const auto& key : f.keys()) {
      const Location loc = locate(key);
      grads[loc.manifold].segment(loc.offset, key.dim) += g.segment(offset, key.dim);
      offset += key.dim;
    }
  }
  return grads;
}

ThetaModel build_theta_model(const FactorGraph& graph, const Values& values, const ManifoldSet& set,
                             const std::vector<TangentBasis>& bases, const std::vector<int>& theta_offsets) {
  const int total = theta_offsets.empty() ? 0 : theta_offsets.back() + bases.back().dim();
  int residual_rows = 0;
  for (const auto& f : graph.costs()) {
    if (f.form() == CostForm::kResidual) residual_rows += f.rows();
  }

  ThetaModel model;
  model.jacobian = Matrix::Zero(residual_rows, total);
  model.gradient = Vector::Zero(total);
  int row = 0;
  for (const auto& f : graph.costs()) {
    const Vector x = f.stack(values);
    const Vector r = f.evaluate(x);
    const Matrix jac = f.jacobian(x);
    const bool scalar = f.form() == CostForm::kScalar;
    model.cost += scalar ? r[0] : r.squaredNorm();

    int col = 0;
    for (const auto& key : f.keys()) {
      const ManifoldSet::Location loc = set.locate(key);
      const TangentBasis& tb = bases[loc.manifold];
      const int width = tb.dim();
      if (width > 0) {
        const Matrix pulled = jac.middleCols(col, key.dim) * tb.basis.middleRows(loc.offset, key.dim);
        if (scalar) {
          model.gradient.segment(theta_offsets[loc.manifold], width) += pulled.row(0).transpose();
        } else {
          model.jacobian.block(row, theta_offsets[loc.manifold], f.rows(), width) += pulled;
        }
      }
      col += key.dim;
    }
    if (!scalar) {
      model.gradient += 2.0 * model.jacobian.middleRows(row, f.rows()).transpose() * r;
      row += f.rows();
    }
  }
  return model;
}

}  // namespace cmcopt::detail
