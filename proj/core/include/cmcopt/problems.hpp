#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmcopt/graph.hpp"

namespace cmcopt {

struct KnownSolution {
  Values values;
  std::string provenance;
};

/// A benchmark instance: graph, initial guess and (when available) a reference minimizer.
struct Problem {
  std::string name;
  FactorGraph graph;
  Values initial;
  std::optional<KnownSolution> known;
};

using ParamOverrides = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Half sphere: x^2 + y^2 + z^2 = 1, z >= 0, potential energy of a point under
// gravity and a spring toward a remote point.

struct HalfSphereParams {
  double gravity_weight = 1.0;
  Eigen::Vector3d remote_point{2.0, 0.0, 0.5};
  double attraction_weight = 1.0;
  Eigen::Vector3d initial{0.0, -0.6, 0.8};
  double init_noise = 0.0;
  std::uint64_t seed = 0;
};

/// cost = gravity_weight * z + attraction_weight / 2 * |X - remote_point|^2.
/// The known solution is closed form whenever the minimizer is unique.
Problem half_sphere_problem(const HalfSphereParams& params = {});

// ---------------------------------------------------------------------------
// Corner manifolds over X = (x, y, z):
//   g1 = 1 - |X|^2 >= 0, g2 = z - x^3 + 0.1 >= 0, g3 = z >= 0          (top)
//   h  = |X|^2 - 1 = 0,   g2 >= 0, g3 >= 0                              (bottom)

enum class CornerVariant { kTop, kBottom };

/// Linear cost `cost_direction . X` over one of the corner manifolds.
Problem corner_problem(CornerVariant variant, const Eigen::Vector3d& cost_direction,
                       const Eigen::Vector3d& initial, std::string name = {});

struct CornerProblems {
  Problem top;     // cost -z: minimizer (0, 0, 1) with only g1 active
  Problem bottom;  // cost  z: minimizers on the arc z = 0, x^3 <= 0.1
};

CornerProblems corner_manifold_problems();

/// Bottom manifold with a cost whose minimizer is the corner where g2 and g3
/// are both active: x = 0.1^(1/3), y = sqrt(1 - x^2), z = 0.
Problem corner_pinned_problem();

// ---------------------------------------------------------------------------
// Planar point-mass hopper: stance / flight / landing over `steps` timesteps.

enum class Phase { kStance, kFlight };

struct HopperParams {
  int steps = 12;
  std::vector<Phase> schedule;  // empty: thirds of stance, flight, stance
  double dt = 0.1;
  double mass = 5.0;
  double gravity = 9.81;
  double friction = 0.7;
  double max_force = 150.0;  // on the normal component
  double leg_min = 0.5;
  double leg_max = 1.2;
  double height = 0.9;  // nominal standing height
  double goal_x = 1.0;
  double obstacle = 1.0;  // body height required during flight
  double w_collocation = 1e3;
  double w_effort = 1e-3;
  double w_jerk = 1e-3;
  double w_foot = 1e2;
  double w_goal = 1e2;
  double init_noise = 0.0;
  std::uint64_t seed = 0;
};

/// Offsets inside a timestep's state vector (p, v, a, f[, c]); the foot c
/// exists in stance only.
enum class HopperField { kPosition = 0, kVelocity = 2, kAcceleration = 4, kForce = 6, kFoot = 8 };

struct HopperStep {
  Phase phase = Phase::kStance;
  VariableKey state;  // dim 10 in stance, 8 in flight

  bool has(HopperField field) const { return field != HopperField::kFoot || phase == Phase::kStance; }
  /// Two-vector `field` of this step in `values`.
  Eigen::Vector2d get(const Values& values, HopperField field) const;
};

struct HopperProblem {
  Problem problem;
  std::vector<HopperStep> steps;
  HopperParams params;
};

/// One state variable per timestep. Per-step equalities: Newton's law
/// m a = f + m g, foot on the ground in stance, zero force in flight, pinned
/// start state and resting final state. Per-step inequalities: friction cone,
/// normal force limit, leg length in stance; obstacle clearance in flight.
/// Trapezoidal collocation, effort, jerk, foot drift and goal terms are
/// costs, so every timestep is its own constraint-connected component.
/// Initial guess: nominal standing pose with zero velocity, acceleration,
/// force and foot position.
HopperProblem hopper_problem(const HopperParams& params = {});

/// Default phase schedule used when HopperParams::schedule is empty.
std::vector<Phase> default_schedule(int steps);

// ---------------------------------------------------------------------------

std::vector<std::string> problem_names();

/// Builds a registered problem. `overrides` keys are problem parameters;
/// unknown names and keys throw PreconditionError.
Problem make_problem(const std::string& name, const ParamOverrides& overrides = {}, std::uint64_t seed = 0);

}  // namespace cmcopt
