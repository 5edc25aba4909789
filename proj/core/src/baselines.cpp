#include "cmcopt/baselines.hpp"

#include <cmath>

namespace cmcopt {

namespace {

// sqrt(weight) * (h(x) - shift)
CostFactor equality_penalty(const EqualityFactor& f, double weight, Vector shift) {
  const double s = std::sqrt(weight);
  return CostFactor(
      f.keys(), f.rows(), [f, s, shift](const Vector& x) -> Vector { return s * (f.evaluate(x) - shift); },
      [f, s](const Vector& x) -> Matrix { return s * f.jacobian(x); }, "penalty:" + f.label());
}

// sqrt(weight) * min(0, g(x) - shift)
CostFactor hinge_penalty(const InequalityFactor& f, double weight, Vector shift) {
  const double s = std::sqrt(weight);
  return CostFactor(
      f.keys(), f.rows(),
      [f, s, shift](const Vector& x) -> Vector { return s * (f.evaluate(x) - shift).cwiseMin(0.0); },
      [f, s, shift](const Vector& x) -> Matrix {
        const Vector g = f.evaluate(x) - shift;
        Matrix jac = s * f.jacobian(x);
        for (int r = 0; r < g.size(); ++r) {
          if (g[r] >= 0.0) jac.row(r).setZero();
        }
        return jac;
      },
      "hinge:" + f.label());
}

ComponentPartition all_free(const FactorGraph& graph) {
  ComponentPartition partition;
  partition.free_variables = graph.variables();
  return partition;
}

void append(SolveResult& total, const SolveResult& part, const IterationSink& sink) {
  const int base = total.history.empty() ? 0 : total.history.back().iter + 1;
  const double t0 = total.history.empty() ? 0.0 : total.history.back().wall_ms;
  for (auto rec : part.history) {
    rec.iter += base;
    rec.wall_ms += t0;
    total.history.push_back(rec);
    if (sink) sink(rec);
  }
}

struct Multipliers {
  std::vector<Vector> eq;
  std::vector<Vector> ineq;
};

SolveResult run_outer(const FactorGraph& graph, const Values& init, const BaselineConfig& config,
                      const IterationSink& sink, bool keep_equalities, bool update_multipliers) {
  const detail::ViolationFn violation = [&graph](const Values& v) { return graph.total_violation(v); };

  Multipliers mult;
  for (const auto& f : graph.equalities()) mult.eq.push_back(Vector::Zero(f.rows()));
  for (const auto& f : graph.inequalities()) mult.ineq.push_back(Vector::Zero(f.rows()));

  SolveResult total;
  Values values = init;
  double mu = config.penalty_init;
  const bool single_pass = keep_equalities && graph.inequalities().empty();
  const int outer_iters = single_pass ? 1 : config.outer_iters;

  for (int outer = 0; outer < outer_iters; ++outer) {
    FactorGraph penalized = graph.without_constraints();
    for (std::size_t k = 0; k < graph.equalities().size(); ++k) {
      const auto& f = graph.equalities()[k];
      if (keep_equalities) {
        penalized.add_equality(f);
      } else {
        penalized.add_cost(equality_penalty(f, mu, mult.eq[k] / (2.0 * mu)));
      }
    }
    for (std::size_t k = 0; k < graph.inequalities().size(); ++k) {
      penalized.add_cost(hinge_penalty(graph.inequalities()[k], mu, mult.ineq[k] / (2.0 * mu)));
    }
    const ComponentPartition partition =
        keep_equalities ? penalized.extract_components() : all_free(penalized);

    SolveResult part = detail::solve_lm(penalized, partition, values, config.inner, {}, violation);
    append(total, part, sink);
    total.dimension = part.dimension;
    total.status = part.status;
    total.message = "outer iteration " + std::to_string(outer + 1) + ": " + to_string(part.status);
    values = part.final_values;
    if (part.status == SolveStatus::kRetractionFailure) break;

    if (update_multipliers) {
      for (std::size_t k = 0; k < graph.equalities().size(); ++k) {
        mult.eq[k] -= 2.0 * mu * graph.equalities()[k].evaluate(values);
      }
      for (std::size_t k = 0; k < graph.inequalities().size(); ++k) {
        mult.ineq[k] = (mult.ineq[k] - 2.0 * mu * graph.inequalities()[k].evaluate(values)).cwiseMax(0.0);
      }
    }
    mu *= config.penalty_growth;
  }

  total.final_values = values;
  total.final_cost = graph.total_cost(values);
  total.final_violation = graph.total_violation(values);
  return total;
}

}  // namespace

SolveResult solve_penalty(const FactorGraph& graph, const Values& init, const BaselineConfig& config,
                          const IterationSink& sink) {
  return run_outer(graph, init, config, sink, false, false);
}

SolveResult solve_auglag(const FactorGraph& graph, const Values& init, const BaselineConfig& config,
                         const IterationSink& sink) {
  return run_outer(graph, init, config, sink, false, true);
}

SolveResult solve_cmopt(const FactorGraph& graph, const Values& init, const BaselineConfig& config,
                        const IterationSink& sink) {
  return run_outer(graph, init, config, sink, true, false);
}

}  // namespace cmcopt
