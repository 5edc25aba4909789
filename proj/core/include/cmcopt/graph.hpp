#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmcopt/types.hpp"

namespace cmcopt {

/// Handle to a variable node. Ids are dense and assigned in insertion order.
struct VariableKey {
  std::size_t id = 0;
  int dim = 0;

  friend bool operator==(const VariableKey&, const VariableKey&) = default;
  friend auto operator<=>(const VariableKey&, const VariableKey&) = default;
};

/// Assignment of real vectors to variable nodes.
class Values {
 public:
  Values() = default;

  /// Inserts or overwrites. Throws PreconditionError on a dimension mismatch.
  void insert(VariableKey key, Vector value);
  const Vector& at(VariableKey key) const;
  Vector& at(VariableKey key);
  bool contains(VariableKey key) const;
  std::size_t size() const { return data_.size(); }

  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

 private:
  std::map<std::size_t, Vector> data_;
};

using FactorEval = std::function<Vector(const Vector&)>;
using FactorJacobian = std::function<Matrix(const Vector&)>;

/// A function of a stacked subset of variables. The input of eval/jacobian is
/// the concatenation of the key values in key order.
class Factor {
 public:
  /// When `jacobian` is empty, central differences are used.
  Factor(std::vector<VariableKey> keys, int rows, FactorEval eval, FactorJacobian jacobian = {},
         std::string label = {});

  const std::vector<VariableKey>& keys() const { return keys_; }
  int rows() const { return rows_; }
  int input_dim() const { return input_dim_; }
  const std::string& label() const { return label_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }

  Vector stack(const Values& values) const;
  Vector evaluate(const Vector& stacked) const;
  Matrix jacobian(const Vector& stacked) const;
  Vector evaluate(const Values& values) const { return evaluate(stack(values)); }
  Matrix jacobian(const Values& values) const { return jacobian(stack(values)); }

 private:
  std::vector<VariableKey> keys_;
  int rows_;
  int input_dim_ = 0;
  FactorEval eval_;
  FactorJacobian jacobian_;
  std::string label_;
};

enum class CostForm {
  kResidual,  // contributes ||r(x)||^2
  kScalar,    // contributes the single entry s(x) as-is
};

class CostFactor : public Factor {
 public:
  CostFactor(std::vector<VariableKey> keys, int rows, FactorEval residual,
             FactorJacobian jacobian = {}, std::string label = {});

  /// Adapter for general smooth costs that are not sums of squares.
  static CostFactor scalar(std::vector<VariableKey> keys, std::function<double(const Vector&)> value,
                           std::function<Vector(const Vector&)> gradient, std::string label = {});

  CostForm form() const { return form_; }
  double cost(const Vector& stacked) const;
  double cost(const Values& values) const { return cost(stack(values)); }
  /// Gradient of cost() with respect to the stacked input.
  Vector gradient(const Vector& stacked) const;

 private:
  CostForm form_ = CostForm::kResidual;
};

/// h(x) = 0.
class EqualityFactor : public Factor {
 public:
  using Factor::Factor;
};

/// g(x) >= 0, componentwise.
class InequalityFactor : public Factor {
 public:
  using Factor::Factor;
};

struct Component {
  std::vector<VariableKey> variables;  // sorted by id
  std::vector<std::size_t> equalities;
  std::vector<std::size_t> inequalities;
};

struct ComponentPartition {
  std::vector<Component> components;  // ordered by smallest variable id
  std::vector<VariableKey> free_variables;
};

/// Bipartite graph of variables and cost / equality / inequality factors.
/// Built single-threaded; const access is reentrant.
class FactorGraph {
 public:
  VariableKey add_variable(int dim, std::string name = {});

  std::size_t add_cost(CostFactor factor);
  std::size_t add_equality(EqualityFactor factor);
  std::size_t add_inequality(InequalityFactor factor);

  const std::vector<VariableKey>& variables() const { return variables_; }
  const std::string& variable_name(VariableKey key) const;
  int ambient_dim() const { return ambient_dim_; }

  const std::vector<CostFactor>& costs() const { return costs_; }
  const std::vector<EqualityFactor>& equalities() const { return equalities_; }
  const std::vector<InequalityFactor>& inequalities() const { return inequalities_; }
  int num_equality_rows() const;
  bool has_constraints() const { return !equalities_.empty() || !inequalities_.empty(); }

  /// Sum of factor costs.
  double total_cost(const Values& values) const;
  /// max over constraints of |h|_inf and max(0, -g)_inf.
  double total_violation(const Values& values) const;
  /// Ambient gradient of total_cost, one block per variable.
  Values cost_gradient(const Values& values) const;

  /// Union-find over constraint adjacency. Costs never merge components.
  ComponentPartition extract_components() const;

  /// Same variables (same keys) and costs, no constraints.
  FactorGraph without_constraints() const;

 private:
  void check_keys(const Factor& factor) const;

  std::vector<VariableKey> variables_;
  std::vector<std::string> names_;
  int ambient_dim_ = 0;
  std::vector<CostFactor> costs_;
  std::vector<EqualityFactor> equalities_;
  std::vector<InequalityFactor> inequalities_;
};

}  // namespace cmcopt
