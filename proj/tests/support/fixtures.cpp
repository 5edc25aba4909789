#include "fixtures.hpp"

#include <cmath>
#include <numbers>

#include "cmcopt/errors.hpp"

namespace cmcopt::fixtures {

ConstrainedManifold first_manifold(const Problem& problem) {
  const ComponentPartition part = problem.graph.extract_components();
  return ConstrainedManifold::from_component(problem.graph, part.components.at(0));
}

Matrix gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

Vector unit_vector(int n, std::mt19937_64& rng) {
  Vector v = gaussian(n, 1, rng).col(0);
  return v / v.norm();
}

Eigen::Vector3d half_sphere_point(std::mt19937_64& rng, bool boundary) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double b = 2.0 * std::numbers::pi * u(rng);
  const double z = boundary ? 0.0 : 0.05 + 0.9 * u(rng);
  const double r = std::sqrt(1.0 - z * z);
  return {r * std::cos(b), r * std::sin(b), z};
}

Eigen::Vector3d corner_bottom_point(std::mt19937_64& rng, bool on_floor) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double b = 2.0 * std::numbers::pi * u(rng);
    const double z = on_floor ? 0.0 : 0.05 + 0.9 * u(rng);
    const double r = std::sqrt(1.0 - z * z);
    const Eigen::Vector3d x(r * std::cos(b), r * std::sin(b), z);
    if (z - x.x() * x.x() * x.x() + 0.1 > 0.02) return x;
  }
}

int hopper_free_stance_step(const HopperParams& params) {
  const std::vector<Phase> schedule = params.schedule.empty() ? default_schedule(params.steps) : params.schedule;
  for (int t = 1; t + 1 < static_cast<int>(schedule.size()); ++t) {
    if (schedule[t] == Phase::kStance) return t;
  }
  return -1;
}

ConstrainedManifold hopper_step_manifold(const HopperProblem& hopper, int step) {
  const HopperStep& st = hopper.steps.at(step);
  if (!st.has(HopperField::kFoot)) throw PreconditionError("hopper step is not a stance step");
  const ComponentPartition part = hopper.problem.graph.extract_components();
  for (const auto& c : part.components) {
    if (c.variables.size() == 1 && c.variables.front() == st.state) {
      return ConstrainedManifold::from_component(hopper.problem.graph, c);
    }
  }
  throw PreconditionError("hopper step is not its own component");
}

Vector hopper_stance_point(const HopperParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cx = 2.0 * u(rng) - 1.0;
  const double psi = std::numbers::pi * (0.3 + 0.4 * u(rng));
  const Eigen::Vector2d c(cx, 0.0);
  const Eigen::Vector2d p = c + params.leg_max * Eigen::Vector2d(std::cos(psi), std::sin(psi));
  const double fz = params.max_force * (0.2 + 0.6 * u(rng));
  const double fx = params.friction * fz * (1.6 * u(rng) - 0.8);
  const Eigen::Vector2d f(fx, fz);
  const Eigen::Vector2d a = (f - Eigen::Vector2d(0.0, params.mass * params.gravity)) / params.mass;
  const Eigen::Vector2d v(2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0);
  Vector x(10);
  x << p, v, a, f, c;
  return x;
}

namespace {

Vector normalize_ambient(const TangentBasis& basis, Vector theta) {
  const double n = (basis.basis * theta).norm();
  return n > 0.0 ? Vector(theta / n) : theta;
}

}  // namespace

Vector face_direction(const TangentBasis& basis, std::mt19937_64& rng) {
  Vector theta = gaussian(basis.dim(), 1, rng).col(0);
  if (basis.cone_rows.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(basis.cone_rows, Eigen::ComputeFullV);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-10 ? 1 : 0;
    const Matrix ns = svd.matrixV().rightCols(basis.dim() - rank);
    theta = ns * (ns.transpose() * theta);
  }
  return normalize_ambient(basis, theta);
}

Vector cone_direction(const TangentBasis& basis, std::mt19937_64& rng) {
  for (;;) {
    Vector theta = gaussian(basis.dim(), 1, rng).col(0);
    if (basis.cone_rows.rows() == 0 || (basis.cone_rows * theta).minCoeff() >= 0.0) {
      return normalize_ambient(basis, theta);
    }
  }
}

}  // namespace cmcopt::fixtures

namespace cmcopt::fixtures {

std::vector<ConstrainedManifold> product_manifolds(const FactorGraph& graph) {
  const ComponentPartition part = graph.extract_components();
  std::vector<ConstrainedManifold> out;
  for (const auto& c : part.components) out.push_back(ConstrainedManifold::from_component(graph, c));
  for (const auto& k : part.free_variables) out.push_back(ConstrainedManifold::euclidean(k));
  return out;
}

Values random_feasible(const Problem& problem, const std::vector<ConstrainedManifold>& manifolds, double noise,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, noise);
  Values v = problem.initial;
  for (const auto& k : problem.graph.variables()) {
    Vector x = v.at(k);
    for (int i = 0; i < x.size(); ++i) x[i] += n(rng);
    v.insert(k, x);
  }
  for (const auto& m : manifolds) m.scatter(project_feasible(m, m.gather(v)), v);
  return v;
}

}  // namespace cmcopt::fixtures
