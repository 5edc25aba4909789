#pragma once

#include <vector>

#include "cmcopt/cmc.hpp"
#include "cmcopt/graph.hpp"
#include "cmcopt/retraction.hpp"

namespace cmcopt::detail {

/// Every component as a ConstrainedManifold, followed by one Euclidean
/// manifold per free variable.
class ManifoldSet {
 public:
  struct Location {
    int manifold = -1;
    int offset = 0;
  };

  ManifoldSet(const FactorGraph& graph, const ComponentPartition& partition, const ManifoldOptions& options);

  int size() const { return static_cast<int>(manifolds_.size()); }
  const ConstrainedManifold& operator[](int i) const { return manifolds_[i]; }
  int search_dimension() const;
  Location locate(VariableKey key) const { return locations_.at(key.id); }

  std::vector<Vector> gather(const Values& values) const;
  Values scatter(const std::vector<Vector>& points) const;
  std::vector<Vector> project(const Values& values, const RetractionOptions& options) const;
  /// Ambient gradient of the total cost, split per manifold.
  std::vector<Vector> cost_gradients(const FactorGraph& graph, const Values& values) const;

 private:
  std::vector<ConstrainedManifold> manifolds_;
  std::vector<Location> locations_;
};

/// Cost model in stacked basis coordinates:
///   cost(theta) ~ cost + gradient^T theta + |J theta|^2 (+ residual cross term folded into gradient).
struct ThetaModel {
  double cost = 0.0;
  Matrix jacobian;  // residual rows x total theta dim
  Vector gradient;  // total theta dim
};

ThetaModel build_theta_model(const FactorGraph& graph, const Values& values, const ManifoldSet& set,
                             const std::vector<TangentBasis>& bases, const std::vector<int>& theta_offsets);

}  // namespace cmcopt::detail
