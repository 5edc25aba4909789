#include <random>

#include <benchmark/benchmark.h>

#include "cmcopt/baselines.hpp"
#include "cmcopt/calculus.hpp"
#include "cmcopt/cmc.hpp"
#include "cmcopt/cone_qp.hpp"
#include "cmcopt/optimizer.hpp"
#include "cmcopt/problems.hpp"
#include "cmcopt/retraction.hpp"

namespace {

using namespace cmcopt;

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_ConeProjection(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int rows = static_cast<int>(state.range(1));
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(rows, dim, rng);
  const Vector p = random_matrix(dim, 1, rng).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(project_to_cone(p, a).theta.data());
}
BENCHMARK(BM_ConeProjection)->Args({3, 2})->Args({6, 4})->Args({16, 8})->Args({64, 16});

// Component of one stance step, projected onto its constraints.
ConstrainedManifold hopper_leg(const Problem& hopper, Vector& point) {
  const ComponentPartition part = hopper.graph.extract_components();
  for (const auto& c : part.components) {
    if (c.variables.front().dim != 10) continue;  // a stance step
    ConstrainedManifold m = ConstrainedManifold::from_component(hopper.graph, c);
    point = project_feasible(m, m.gather(hopper.initial));
    return m;
  }
  throw Error("no stance component");
}

void BM_TangentBasisHalfSphere(benchmark::State& state) {
  const Problem p = half_sphere_problem();
  const ConstrainedManifold m = ConstrainedManifold::from_component(p.graph, p.graph.extract_components().components[0]);
  const Vector x = Eigen::Vector3d(0.0, 0.6, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(tangent_basis(m, x).basis.data());
}
BENCHMARK(BM_TangentBasisHalfSphere);

void BM_TangentBasisHopperLeg(benchmark::State& state) {
  const Problem p = hopper_problem().problem;
  Vector x;
  const ConstrainedManifold m = hopper_leg(p, x);
  for (auto _ : state) benchmark::DoNotOptimize(tangent_basis(m, x).basis.data());
}
BENCHMARK(BM_TangentBasisHopperLeg);

void BM_RiemannianGradientCorner(benchmark::State& state) {
  const Problem p = corner_pinned_problem();
  const ConstrainedManifold m = ConstrainedManifold::from_component(p.graph, p.graph.extract_components().components[0]);
  const Vector x = p.known->values.at(p.graph.variables()[0]);
  const Vector grad = p.graph.cost_gradient(p.known->values).at(p.graph.variables()[0]);
  for (auto _ : state) benchmark::DoNotOptimize(riemannian_gradient(m, x, grad).projected_theta.data());
}
BENCHMARK(BM_RiemannianGradientCorner);

void BM_RetractHalfSphere(benchmark::State& state) {
  const Problem p = half_sphere_problem();
  const ConstrainedManifold m = ConstrainedManifold::from_component(p.graph, p.graph.extract_components().components[0]);
  const Vector x = Eigen::Vector3d(0.0, 0.6, 0.8);
  const TangentBasis b = tangent_basis(m, x);
  const Vector v = 0.3 * b.basis.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(retract(m, x, v).data());
}
BENCHMARK(BM_RetractHalfSphere);

void BM_RetractOntoCorner(benchmark::State& state) {
  // the step crosses the floor, so the projection lands on the rim
  const Problem p = half_sphere_problem();
  const ConstrainedManifold m = ConstrainedManifold::from_component(p.graph, p.graph.extract_components().components[0]);
  const Vector x = Eigen::Vector3d(0.0, 0.6, 0.8);
  const Vector v = Eigen::Vector3d(0.0, 0.8, -0.6) * 1.5;
  for (auto _ : state) benchmark::DoNotOptimize(retract(m, x, v).data());
}
BENCHMARK(BM_RetractOntoCorner);

void BM_SolveHalfSphere(benchmark::State& state) {
  const Problem p = half_sphere_problem();
  const ComponentPartition part = p.graph.extract_components();
  for (auto _ : state) {
    const SolveResult r = state.range(0) ? solve_lm(p.graph, part, p.initial) : solve_rgd(p.graph, part, p.initial);
    benchmark::DoNotOptimize(r.final_cost);
  }
}
BENCHMARK(BM_SolveHalfSphere)->Arg(0)->Arg(1)->ArgName("lm")->Unit(benchmark::kMillisecond);

void BM_SolveHopperLm(benchmark::State& state) {
  const Problem p = make_problem("hopper", {{"T", static_cast<double>(state.range(0))}});
  const ComponentPartition part = p.graph.extract_components();
  for (auto _ : state) benchmark::DoNotOptimize(solve_lm(p.graph, part, p.initial).final_cost);
  state.counters["N"] = p.graph.ambient_dim();
}
BENCHMARK(BM_SolveHopperLm)->Arg(6)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_SolveHopperAugLag(benchmark::State& state) {
  const Problem p = make_problem("hopper");
  for (auto _ : state) benchmark::DoNotOptimize(solve_auglag(p.graph, p.initial).final_cost);
}
BENCHMARK(BM_SolveHopperAugLag)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
