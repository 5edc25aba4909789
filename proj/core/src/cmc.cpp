#include "cmcopt/cmc.hpp"

#include <algorithm>
#include <cmath>

namespace cmcopt {

ConstrainedManifold::ConstrainedManifold(std::vector<VariableKey> keys,
                                         std::vector<EqualityFactor> equalities,
                                         std::vector<InequalityFactor> inequalities,
                                         ManifoldOptions options)
    : keys_(std::move(keys)),
      equalities_(std::move(equalities)),
      inequalities_(std::move(inequalities)),
      options_(options) {
  if (keys_.empty()) throw PreconditionError("manifold needs at least one variable");
  for (const auto& key : keys_) {
    offsets_.push_back(ambient_dim_);
    ambient_dim_ += key.dim;
  }
  for (const auto& f : equalities_) {
    eq_blocks_.push_back(make_block(f, num_eq_rows_));
    num_eq_rows_ += f.rows();
  }
  for (const auto& f : inequalities_) {
    ineq_blocks_.push_back(make_block(f, num_ineq_rows_));
    num_ineq_rows_ += f.rows();
  }
  if (num_eq_rows_ > ambient_dim_) {
    throw PreconditionError("manifold has more equality rows (" + std::to_string(num_eq_rows_) +
                            ") than ambient dimensions (" + std::to_string(ambient_dim_) + ")");
  }
}

ConstrainedManifold ConstrainedManifold::from_component(const FactorGraph& graph,
                                                        const Component& component,
                                                        ManifoldOptions options) {
  std::vector<EqualityFactor> eqs;
  std::vector<InequalityFactor> ineqs;
  for (auto k : component.equalities) eqs.push_back(graph.equalities().at(k));
  for (auto k : component.inequalities) ineqs.push_back(graph.inequalities().at(k));
  return ConstrainedManifold(component.variables, std::move(eqs), std::move(ineqs), options);
}

ConstrainedManifold ConstrainedManifold::euclidean(VariableKey key, ManifoldOptions options) {
  return ConstrainedManifold({key}, {}, {}, options);
}

int ConstrainedManifold::offset_of(VariableKey key) const {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i] == key) return offsets_[i];
  }
  return -1;
}

ConstrainedManifold::Block ConstrainedManifold::make_block(const Factor& factor, int row) const {
  Block block;
  block.row = row;
  for (const auto& key : factor.keys()) {
    const int offset = offset_of(key);
    if (offset < 0) {
      throw PreconditionError("factor '" + factor.label() + "' touches a variable outside the manifold");
    }
    for (int i = 0; i < key.dim; ++i) block.index.push_back(offset + i);
  }
  return block;
}

Vector ConstrainedManifold::gather(const Values& values) const {
  Vector x(ambient_dim_);
  for (std::size_t i = 0; i < keys_.size(); ++i) x.segment(offsets_[i], keys_[i].dim) = values.at(keys_[i]);
  return x;
}

void ConstrainedManifold::scatter(const Vector& x, Values& values) const {
  if (x.size() != ambient_dim_) throw PreconditionError("scatter: wrong local dimension");
  for (std::size_t i = 0; i < keys_.size(); ++i) values.insert(keys_[i], x.segment(offsets_[i], keys_[i].dim));
}

template <class F>
Vector ConstrainedManifold::eval_stack(const std::vector<F>& factors, const std::vector<Block>& blocks,
                                       int rows, const Vector& x) const {
  if (x.size() != ambient_dim_) throw PreconditionError("manifold point has wrong dimension");
  Vector out(rows);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    out.segment(blocks[k].row, factors[k].rows()) = factors[k].evaluate(x(blocks[k].index));
  }
  return out;
}

template <class F>
Matrix ConstrainedManifold::jac_stack(const std::vector<F>& factors, const std::vector<Block>& blocks,
                                      int rows, const Vector& x) const {
  if (x.size() != ambient_dim_) throw PreconditionError("manifold point has wrong dimension");
  Matrix out = Matrix::Zero(rows, ambient_dim_);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const Matrix jac = factors[k].jacobian(x(blocks[k].index));
    const auto& index = blocks[k].index;
    for (std::size_t c = 0; c < index.size(); ++c) {
      out.block(blocks[k].row, index[c], factors[k].rows(), 1) += jac.col(static_cast<int>(c));
    }
  }
  return out;
}

Vector ConstrainedManifold::equality_values(const Vector& x) const {
  return eval_stack(equalities_, eq_blocks_, num_eq_rows_, x);
}

Matrix ConstrainedManifold::equality_jacobian(const Vector& x) const {
  return jac_stack(equalities_, eq_blocks_, num_eq_rows_, x);
}

Vector ConstrainedManifold::inequality_values(const Vector& x) const {
  return eval_stack(inequalities_, ineq_blocks_, num_ineq_rows_, x);
}

Matrix ConstrainedManifold::inequality_jacobian(const Vector& x) const {
  return jac_stack(inequalities_, ineq_blocks_, num_ineq_rows_, x);
}

double ConstrainedManifold::violation(const Vector& x) const {
  double worst = 0.0;
  if (num_eq_rows_ > 0) worst = equality_values(x).lpNorm<Eigen::Infinity>();
  if (num_ineq_rows_ > 0) worst = std::max(worst, (-inequality_values(x)).cwiseMax(0.0).maxCoeff());
  return worst;
}

ActiveSet classify_active(const ConstrainedManifold& manifold, const Vector& x) {
  ActiveSet set;
  if (manifold.num_inequalities() == 0) return set;
  const double tol = manifold.options().active_tol;
  const Vector g = manifold.inequality_values(x);
  for (int l = 0; l < g.size(); ++l) {
    if (g[l] < -tol) throw InfeasiblePointError(l, g[l]);
    (std::abs(g[l]) <= tol ? set.active : set.inactive).push_back(l);
  }
  return set;
}

namespace {

Matrix stacked_jacobian(const ConstrainedManifold& manifold, const Vector& x, const ActiveSet& active) {
  const int n_h = manifold.num_equalities();
  const int n_a = static_cast<int>(active.active.size());
  Matrix jac(n_h + n_a, manifold.ambient_dim());
  if (n_h > 0) jac.topRows(n_h) = manifold.equality_jacobian(x);
  if (n_a > 0) jac.bottomRows(n_a) = manifold.inequality_jacobian(x)(active.active, Eigen::all);
  return jac;
}

}  // namespace

RankReport check_rank(const ConstrainedManifold& manifold, const Vector& x, const ActiveSet& active) {
  RankReport report;
  const Matrix jac = stacked_jacobian(manifold, x, active);
  const int rows = static_cast<int>(jac.rows());
  report.expected = rows;
  if (rows == 0) return report;

  Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeFullU);
  report.singular_values = svd.singularValues();
  const double smax = report.singular_values.size() > 0 ? report.singular_values[0] : 0.0;
  const double cutoff = manifold.options().rank_rtol * smax;
  report.rank = 0;
  for (int i = 0; i < report.singular_values.size(); ++i) {
    if (smax > 0.0 && report.singular_values[i] > cutoff) ++report.rank;
  }
  report.ok = report.rank == rows;
  if (report.ok) return report;

  // Rows carrying weight in the left null directions are the dependent ones.
  const Matrix& u = svd.matrixU();
  const int n_h = manifold.num_equalities();
  for (int r = 0; r < rows; ++r) {
    double weight = 0.0;
    for (int c = report.rank; c < rows; ++c) weight = std::max(weight, std::abs(u(r, c)));
    if (weight > 1e-6) {
      if (r < n_h) {
        report.dependent_rows.push_back({true, r});
      } else {
        report.dependent_rows.push_back({false, active.active[r - n_h]});
      }
    }
  }
  return report;
}

TangentBasis tangent_basis(const ConstrainedManifold& manifold, const Vector& x) {
  TangentBasis tb;
  tb.base = x;
  tb.active = classify_active(manifold, x);
  const RankReport report = check_rank(manifold, x, tb.active);
  if (!report.ok) throw RankDeficiencyError(report);

  const int dim = manifold.ambient_dim();
  const int n_h = manifold.num_equalities();
  if (n_h == 0) {
    tb.basis = Matrix::Identity(dim, dim);
  } else {
    const Matrix jt = manifold.equality_jacobian(x).transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(jt);
    const Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    tb.basis = q.rightCols(dim - n_h);
  }

  if (!tb.active.interior()) {
    tb.cone_rows = manifold.inequality_jacobian(x)(tb.active.active, Eigen::all) * tb.basis;
    if (manifold.options().basis_mode == BasisMode::kCornerAligned && tb.dim() > 0) {
      // Rotate so that span(cone_rows^T) occupies the leading coordinates.
      const int k = static_cast<int>(tb.cone_rows.rows());
      Eigen::HouseholderQR<Matrix> qr(tb.cone_rows.transpose());
      const Matrix rot = qr.householderQ() * Matrix::Identity(tb.dim(), tb.dim());
      tb.basis = tb.basis * rot;
      tb.cone_rows = tb.cone_rows * rot;
      tb.cone_rows.rightCols(tb.dim() - std::min(k, tb.dim())).setZero();
    }
  } else {
    tb.cone_rows = Matrix(0, tb.dim());
  }
  return tb;
}

CornerDims corner_model_dims(const ConstrainedManifold& manifold, const Vector& x) {
  const ActiveSet active = classify_active(manifold, x);
  CornerDims dims;
  dims.n = manifold.intrinsic_dim();
  dims.m = dims.n - static_cast<int>(active.active.size());
  return dims;
}

TangentVector make_tangent(const TangentBasis& basis, const Vector& theta) {
  if (theta.size() != basis.dim()) throw PreconditionError("theta has wrong dimension");
  return {basis.base, theta, basis.basis * theta};
}

bool in_tangent_cone(const ConstrainedManifold& manifold, const TangentBasis& basis, const Vector& v,
                     double tol) {
  if (v.size() != manifold.ambient_dim()) throw PreconditionError("tangent vector has wrong dimension");
  const double scale = tol * (1.0 + v.norm());
  if (manifold.num_equalities() > 0 &&
      (manifold.equality_jacobian(basis.base) * v).lpNorm<Eigen::Infinity>() > scale) {
    return false;
  }
  if (!basis.active.interior()) {
    const Vector slope = manifold.inequality_jacobian(basis.base)(basis.active.active, Eigen::all) * v;
    if (slope.minCoeff() < -scale) return false;
  }
  return true;
}

}  // namespace cmcopt
