#pragma once

#include <vector>

#include "cmcopt/errors.hpp"
#include "cmcopt/graph.hpp"
#include "cmcopt/types.hpp"

namespace cmcopt {

enum class BasisMode {
  kOrthonormal,   // nullspace columns from a pivoted QR of dh^T
  kCornerAligned, // additionally rotated so only the first |active| coordinates enter the cone
};

struct ManifoldOptions {
  double active_tol = 1e-8;  // |g_l| <= active_tol  =>  row l is active
  double rank_rtol = 1e-10;  // singular values above rank_rtol * sigma_max count toward the rank
  BasisMode basis_mode = BasisMode::kOrthonormal;
};

struct ActiveSet {
  std::vector<int> active;
  std::vector<int> inactive;

  bool interior() const { return active.empty(); }
};

/// Linearization of the manifold at a base point: the tangent cone is
/// { basis * theta : cone_rows * theta >= 0 }.
struct TangentBasis {
  Vector base;
  Matrix basis;      // N_c x n
  Matrix cone_rows;  // |active| x n
  ActiveSet active;

  int dim() const { return static_cast<int>(basis.cols()); }
};

struct TangentVector {
  Vector base;
  Vector theta;
  Vector ambient;
};

/// Local model space H^n_m: n intrinsic dimensions, m of them unrestricted.
struct CornerDims {
  int n = 0;
  int m = 0;

  friend bool operator==(const CornerDims&, const CornerDims&) = default;
};

/// The feasible set { x : h(x) = 0, g(x) >= 0 } of one constraint-connected
/// component. Operates on the stacked local vector of its variables.
class ConstrainedManifold {
 public:
  ConstrainedManifold(std::vector<VariableKey> keys, std::vector<EqualityFactor> equalities,
                      std::vector<InequalityFactor> inequalities, ManifoldOptions options = {});

  static ConstrainedManifold from_component(const FactorGraph& graph, const Component& component,
                                            ManifoldOptions options = {});
  /// R^d with identity basis and identity retraction.
  static ConstrainedManifold euclidean(VariableKey key, ManifoldOptions options = {});

  const std::vector<VariableKey>& keys() const { return keys_; }
  const ManifoldOptions& options() const { return options_; }
  int ambient_dim() const { return ambient_dim_; }
  int num_equalities() const { return num_eq_rows_; }
  int num_inequalities() const { return num_ineq_rows_; }
  int intrinsic_dim() const { return ambient_dim_ - num_eq_rows_; }
  bool is_euclidean() const { return num_eq_rows_ == 0 && num_ineq_rows_ == 0; }
  /// Offset of a variable inside the stacked local vector, or -1.
  int offset_of(VariableKey key) const;

  Vector gather(const Values& values) const;
  void scatter(const Vector& x, Values& values) const;

  Vector equality_values(const Vector& x) const;
  Matrix equality_jacobian(const Vector& x) const;
  Vector inequality_values(const Vector& x) const;
  Matrix inequality_jacobian(const Vector& x) const;
  double violation(const Vector& x) const;

 private:
  struct Block {
    std::vector<int> index;  // local coordinates feeding the factor, in factor key order
    int row = 0;             // first output row in the stacked constraint vector
  };

  template <class F>
  Vector eval_stack(const std::vector<F>& factors, const std::vector<Block>& blocks, int rows,
                    const Vector& x) const;
  template <class F>
  Matrix jac_stack(const std::vector<F>& factors, const std::vector<Block>& blocks, int rows,
                   const Vector& x) const;
  Block make_block(const Factor& factor, int row) const;

  std::vector<VariableKey> keys_;
  std::vector<int> offsets_;
  int ambient_dim_ = 0;
  std::vector<EqualityFactor> equalities_;
  std::vector<InequalityFactor> inequalities_;
  std::vector<Block> eq_blocks_;
  std::vector<Block> ineq_blocks_;
  int num_eq_rows_ = 0;
  int num_ineq_rows_ = 0;
  ManifoldOptions options_;
};

/// Throws InfeasiblePointError naming the first row with g < -active_tol.
ActiveSet classify_active(const ConstrainedManifold& manifold, const Vector& x);

/// Numerical rank of [dh; dg_active] via SVD.
RankReport check_rank(const ConstrainedManifold& manifold, const Vector& x, const ActiveSet& active);

/// Throws RankDeficiencyError when check_rank fails.
TangentBasis tangent_basis(const ConstrainedManifold& manifold, const Vector& x);

CornerDims corner_model_dims(const ConstrainedManifold& manifold, const Vector& x);

TangentVector make_tangent(const TangentBasis& basis, const Vector& theta);

/// True when dh v = 0 and dg_active v >= 0 up to `tol * (1 + |v|)`.
bool in_tangent_cone(const ConstrainedManifold& manifold, const TangentBasis& basis, const Vector& v,
                     double tol = 1e-8);

}  // namespace cmcopt
