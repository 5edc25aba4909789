#include "cmcopt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cmcopt/errors.hpp"

namespace cmcopt {

void Values::insert(VariableKey key, Vector value) {
  if (value.size() != key.dim) {
    std::ostringstream os;
    os << "value for variable " << key.id << " has size " << value.size() << ", expected " << key.dim;
    throw PreconditionError(os.str());
  }
  data_.insert_or_assign(key.id, std::move(value));
}

const Vector& Values::at(VariableKey key) const {
  auto it = data_.find(key.id);
  if (it == data_.end()) {
    throw MissingValueError("no value assigned to variable " + std::to_string(key.id));
  }
  return it->second;
}

Vector& Values::at(VariableKey key) {
  auto it = data_.find(key.id);
  if (it == data_.end()) {
    throw MissingValueError("no value assigned to variable " + std::to_string(key.id));
  }
  return it->second;
}

bool Values::contains(VariableKey key) const { return data_.count(key.id) > 0; }

Factor::Factor(std::vector<VariableKey> keys, int rows, FactorEval eval, FactorJacobian jacobian,
               std::string label)
    : keys_(std::move(keys)),
      rows_(rows),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      label_(std::move(label)) {
  if (keys_.empty()) throw PreconditionError("factor must touch at least one variable");
  if (rows_ < 1) throw PreconditionError("factor must have at least one output row");
  if (!eval_) throw PreconditionError("factor has no evaluation function");
  for (const auto& key : keys_) input_dim_ += key.dim;
}

Vector Factor::stack(const Values& values) const {
  Vector x(input_dim_);
  int offset = 0;
  for (const auto& key : keys_) {
    x.segment(offset, key.dim) = values.at(key);
    offset += key.dim;
  }
  return x;
}

Vector Factor::evaluate(const Vector& stacked) const {
  if (stacked.size() != input_dim_) throw PreconditionError("factor input has wrong dimension");
  Vector out = eval_(stacked);
  if (out.size() != rows_) {
    throw PreconditionError("factor '" + label_ + "' returned " + std::to_string(out.size()) +
                            " rows, declared " + std::to_string(rows_));
  }
  return out;
}

Matrix Factor::jacobian(const Vector& stacked) const {
  if (stacked.size() != input_dim_) throw PreconditionError("factor input has wrong dimension");
  if (jacobian_) {
    Matrix jac = jacobian_(stacked);
    if (jac.rows() != rows_ || jac.cols() != input_dim_) {
      throw PreconditionError("factor '" + label_ + "' Jacobian has wrong shape");
    }
    return jac;
  }
  Matrix jac(rows_, input_dim_);
  Vector x = stacked;
  for (int i = 0; i < input_dim_; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(stacked[i]));
    x[i] = stacked[i] + h;
    const Vector plus = eval_(x);
    x[i] = stacked[i] - h;
    const Vector minus = eval_(x);
    x[i] = stacked[i];
    jac.col(i) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

CostFactor::CostFactor(std::vector<VariableKey> keys, int rows, FactorEval residual,
                       FactorJacobian jacobian, std::string label)
    : Factor(std::move(keys), rows, std::move(residual), std::move(jacobian), std::move(label)) {}

CostFactor CostFactor::scalar(std::vector<VariableKey> keys, std::function<double(const Vector&)> value,
                              std::function<Vector(const Vector&)> gradient, std::string label) {
  FactorEval eval = [value = std::move(value)](const Vector& x) {
    Vector out(1);
    out[0] = value(x);
    return out;
  };
  FactorJacobian jac;
  if (gradient) {
    jac = [gradient = std::move(gradient)](const Vector& x) -> Matrix {
      return gradient(x).transpose();
    };
  }
  CostFactor factor(std::move(keys), 1, std::move(eval), std::move(jac), std::move(label));
  factor.form_ = CostForm::kScalar;
  return factor;
}

double CostFactor::cost(const Vector& stacked) const {
  const Vector r = evaluate(stacked);
  return form_ == CostForm::kScalar ? r[0] : r.squaredNorm();
}

Vector CostFactor::gradient(const Vector& stacked) const {
  const Matrix jac = jacobian(stacked);
  if (form_ == CostForm::kScalar) return jac.row(0).transpose();
  return 2.0 * jac.transpose() * evaluate(stacked);
}

VariableKey FactorGraph::add_variable(int dim, std::string name) {
  if (dim < 1) throw PreconditionError("variable dimension must be >= 1");
  VariableKey key{variables_.size(), dim};
  variables_.push_back(key);
  if (name.empty()) name = "x" + std::to_string(key.id);
  names_.push_back(std::move(name));
  ambient_dim_ += dim;
  return key;
}

const std::string& FactorGraph::variable_name(VariableKey key) const {
  if (key.id >= names_.size()) throw PreconditionError("unknown variable");
  return names_[key.id];
}

void FactorGraph::check_keys(const Factor& factor) const {
  for (const auto& key : factor.keys()) {
    if (key.id >= variables_.size() || variables_[key.id] != key) {
      throw PreconditionError("factor '" + factor.label() + "' references unknown variable " +
                              std::to_string(key.id));
    }
  }
}

std::size_t FactorGraph::add_cost(CostFactor factor) {
  check_keys(factor);
  costs_.push_back(std::move(factor));
  return costs_.size() - 1;
}

std::size_t FactorGraph::add_equality(EqualityFactor factor) {
  check_keys(factor);
  equalities_.push_back(std::move(factor));
  return equalities_.size() - 1;
}

std::size_t FactorGraph::add_inequality(InequalityFactor factor) {
  check_keys(factor);
  inequalities_.push_back(std::move(factor));
  return inequalities_.size() - 1;
}

int FactorGraph::num_equality_rows() const {
  int rows = 0;
  for (const auto& f : equalities_) rows += f.rows();
  return rows;
}

double FactorGraph::total_cost(const Values& values) const {
  double total = 0.0;
  for (const auto& f : costs_) total += f.cost(values);
  return total;
}

double FactorGraph::total_violation(const Values& values) const {
  double worst = 0.0;
  for (const auto& f : equalities_) worst = std::max(worst, f.evaluate(values).lpNorm<Eigen::Infinity>());
  for (const auto& f : inequalities_) {
    const Vector g = f.evaluate(values);
    worst = std::max(worst, (-g).cwiseMax(0.0).maxCoeff());
  }
  return worst;
}

Values FactorGraph::cost_gradient(const Values& values) const {
  Values grad;
  for (const auto& key : variables_) grad.insert(key, Vector::Zero(key.dim));
  for (const auto& f : costs_) {
    const Vector g = f.gradient(f.stack(values));
    int offset = 0;
    for (const auto& key : f.keys()) {
      grad.at(key) += g.segment(offset, key.dim);
      offset += key.dim;
    }
  }
  return grad;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // Keeps the smaller id as root so roots do not depend on merge order.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

ComponentPartition FactorGraph::extract_components() const {
  const std::size_t n = variables_.size();
  UnionFind uf(n);
  std::vector<bool> constrained(n, false);

  auto link = [&](const Factor& f) {
    const auto& keys = f.keys();
    for (const auto& key : keys) {
      constrained[key.id] = true;
      uf.unite(keys.front().id, key.id);
    }
  };
  for (const auto& f : equalities_) link(f);
  for (const auto& f : inequalities_) link(f);

  ComponentPartition partition;
  std::map<std::size_t, std::size_t> root_to_component;
  for (std::size_t i = 0; i < n; ++i) {
    if (!constrained[i]) {
      partition.free_variables.push_back(variables_[i]);
      continue;
    }
    const std::size_t root = uf.find(i);
    auto [it, inserted] = root_to_component.try_emplace(root, partition.components.size());
    if (inserted) partition.components.emplace_back();
    partition.components[it->second].variables.push_back(variables_[i]);
  }
  for (std::size_t k = 0; k < equalities_.size(); ++k) {
    const std::size_t root = uf.find(equalities_[k].keys().front().id);
    partition.components[root_to_component.at(root)].equalities.push_back(k);
  }
  for (std::size_t k = 0; k < inequalities_.size(); ++k) {
    const std::size_t root = uf.find(inequalities_[k].keys().front().id);
    partition.components[root_to_component.at(root)].inequalities.push_back(k);
  }
  return partition;
}

FactorGraph FactorGraph::without_constraints() const {
  FactorGraph out;
  out.variables_ = variables_;
  out.names_ = names_;
  out.ambient_dim_ = ambient_dim_;
  out.costs_ = costs_;
  return out;
}

}  // namespace cmcopt
