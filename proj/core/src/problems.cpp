#include "cmcopt/problems.hpp"

#include <cmath>
#include <random>
#include <set>

#include "cmcopt/errors.hpp"

namespace cmcopt {

namespace {

Vector jitter(Vector v, double noise, std::mt19937_64& rng) {
  if (noise <= 0.0) return v;
  std::normal_distribution<double> dist(0.0, noise);
  for (int i = 0; i < v.size(); ++i) v[i] += dist(rng);
  return v;
}

EqualityFactor sphere_equality(VariableKey x) {
  return EqualityFactor(
      {x}, 1, [](const Vector& v) { return Vector::Constant(1, v.squaredNorm() - 1.0); },
      [](const Vector& v) -> Matrix { return 2.0 * v.transpose(); }, "h");
}

InequalityFactor ball_inequality(VariableKey x) {
  return InequalityFactor(
      {x}, 1, [](const Vector& v) { return Vector::Constant(1, 1.0 - v.squaredNorm()); },
      [](const Vector& v) -> Matrix { return -2.0 * v.transpose(); }, "g1");
}

InequalityFactor cubic_inequality(VariableKey x) {
  return InequalityFactor(
      {x}, 1, [](const Vector& v) { return Vector::Constant(1, v[2] - v[0] * v[0] * v[0] + 0.1); },
      [](const Vector& v) -> Matrix {
        Matrix j(1, 3);
        j << -3.0 * v[0] * v[0], 0.0, 1.0;
        return j;
      },
      "g2");
}

InequalityFactor floor_inequality(VariableKey x, std::string label) {
  return InequalityFactor(
      {x}, 1, [](const Vector& v) { return Vector::Constant(1, v[2]); },
      [](const Vector&) -> Matrix {
        Matrix j(1, 3);
        j << 0.0, 0.0, 1.0;
        return j;
      },
      std::move(label));
}

CostFactor linear_cost(VariableKey x, const Eigen::Vector3d& a, std::string label) {
  const Vector dir = a;
  return CostFactor::scalar(
      {x}, [dir](const Vector& v) { return dir.dot(v); }, [dir](const Vector&) { return dir; },
      std::move(label));
}

constexpr int offset(HopperField field) { return static_cast<int>(field); }

}  // namespace

Eigen::Vector2d HopperStep::get(const Values& values, HopperField field) const {
  if (!has(field)) throw PreconditionError("flight steps have no foot position");
  return values.at(state).segment<2>(offset(field));
}

Problem half_sphere_problem(const HalfSphereParams& params) {
  Problem p;
  p.name = "half_sphere";
  const VariableKey x = p.graph.add_variable(3, "X");
  p.graph.add_equality(sphere_equality(x));
  p.graph.add_inequality(floor_inequality(x, "g"));

  if (params.attraction_weight != 0.0) {
    const double s = std::sqrt(0.5 * params.attraction_weight);
    const Vector target = params.remote_point;
    p.graph.add_cost(CostFactor(
        {x}, 3, [s, target](const Vector& v) -> Vector { return s * (v - target); },
        [s](const Vector&) -> Matrix { return s * Matrix::Identity(3, 3); }, "attraction"));
  }
  if (params.gravity_weight != 0.0) {
    p.graph.add_cost(linear_cost(x, Eigen::Vector3d(0.0, 0.0, params.gravity_weight), "gravity"));
  }

  std::mt19937_64 rng(params.seed);
  p.initial.insert(x, jitter(params.initial, params.init_noise, rng));

  // On the sphere the cost is const - X . d with d = w_a P - w_g e_z.
  const Eigen::Vector3d d =
      params.attraction_weight * params.remote_point - Eigen::Vector3d(0.0, 0.0, params.gravity_weight);
  Eigen::Vector3d minimizer;
  bool unique = true;
  if (d.z() >= 0.0 && d.norm() > 0.0) {
    minimizer = d.normalized();
  } else if (d.head<2>().norm() > 0.0) {
    minimizer << d.head<2>().normalized(), 0.0;
  } else {
    unique = false;
  }
  if (unique) {
    KnownSolution known;
    known.values.insert(x, minimizer);
    known.provenance = "closed form: cost is linear on the unit sphere";
    p.known = std::move(known);
  }
  return p;
}

Problem corner_problem(CornerVariant variant, const Eigen::Vector3d& cost_direction,
                       const Eigen::Vector3d& initial, std::string name) {
  Problem p;
  p.name = name.empty() ? (variant == CornerVariant::kTop ? "corner_top" : "corner_bottom") : std::move(name);
  const VariableKey x = p.graph.add_variable(3, "X");
  if (variant == CornerVariant::kTop) {
    p.graph.add_inequality(ball_inequality(x));
  } else {
    p.graph.add_equality(sphere_equality(x));
  }
  p.graph.add_inequality(cubic_inequality(x));
  p.graph.add_inequality(floor_inequality(x, "g3"));
  p.graph.add_cost(linear_cost(x, cost_direction, "linear"));
  p.initial.insert(x, initial);
  return p;
}

CornerProblems corner_manifold_problems() {
  CornerProblems out{
      corner_problem(CornerVariant::kTop, {0.0, 0.0, -1.0}, {0.1, 0.2, 0.3}),
      corner_problem(CornerVariant::kBottom, {0.0, 0.0, 1.0}, Eigen::Vector3d(0.1, 0.3, 0.9).normalized()),
  };
  KnownSolution top;
  top.values.insert(out.top.graph.variables()[0], Eigen::Vector3d(0.0, 0.0, 1.0));
  top.provenance = "closed form: highest point of the unit ball";
  out.top.known = std::move(top);
  return out;
}

Problem corner_pinned_problem() {
  Problem p = corner_problem(CornerVariant::kBottom, {-1.0, -0.2, 3.0},
                             Eigen::Vector3d(0.1, 0.3, 0.9).normalized(), "corner_pinned");
  const double x = std::cbrt(0.1);
  KnownSolution known;
  known.values.insert(p.graph.variables()[0], Eigen::Vector3d(x, std::sqrt(1.0 - x * x), 0.0));
  known.provenance = "closed form: intersection of z = 0, z = x^3 - 0.1 and the unit sphere";
  p.known = std::move(known);
  return p;
}

std::vector<Phase> default_schedule(int steps) {
  if (steps < 1) throw PreconditionError("hopper needs at least one timestep");
  std::vector<Phase> schedule(steps, Phase::kStance);
  if (steps < 3) return schedule;
  const int stance = steps / 3;
  const int flight = steps / 3;
  for (int t = stance; t < stance + flight; ++t) schedule[t] = Phase::kFlight;
  return schedule;
}

HopperProblem hopper_problem(const HopperParams& params) {
  HopperProblem out;
  out.params = params;
  std::vector<Phase> schedule = params.schedule.empty() ? default_schedule(params.steps) : params.schedule;
  if (static_cast<int>(schedule.size()) != params.steps) {
    throw PreconditionError("hopper schedule length does not match the number of steps");
  }
  if (schedule.front() != Phase::kStance || schedule.back() != Phase::kStance) {
    throw PreconditionError("hopper schedule must start and end in stance");
  }
  if (params.dt <= 0.0 || params.mass <= 0.0 || params.friction <= 0.0 || params.leg_min <= 0.0 ||
      params.leg_max <= params.leg_min || params.height < params.leg_min || params.height > params.leg_max ||
      params.max_force < params.mass * params.gravity) {
    throw PreconditionError("hopper parameters are infeasible");
  }

  Problem& p = out.problem;
  p.name = "hopper";
  FactorGraph& graph = p.graph;
  const double m = params.mass;
  const double g = params.gravity;
  const int steps = params.steps;

  for (int t = 0; t < steps; ++t) {
    HopperStep step;
    step.phase = schedule[t];
    step.state = graph.add_variable(step.phase == Phase::kStance ? 10 : 8, "x" + std::to_string(t));
    out.steps.push_back(step);
  }

  const Eigen::Vector2d start(0.0, params.height);
  const Eigen::Vector2d goal(params.goal_x, params.height);
  constexpr int kP = offset(HopperField::kPosition);
  constexpr int kV = offset(HopperField::kVelocity);
  constexpr int kA = offset(HopperField::kAcceleration);
  constexpr int kF = offset(HopperField::kForce);
  constexpr int kC = offset(HopperField::kFoot);

  auto pin = [&graph](const HopperStep& st, int at, const Eigen::Vector2d& target, std::string label) {
    const int d = st.state.dim;
    graph.add_equality(EqualityFactor(
        {st.state}, 2, [at, target](const Vector& x) -> Vector { return x.segment<2>(at) - target; },
        [at, d](const Vector&) -> Matrix {
          Matrix j = Matrix::Zero(2, d);
          j.block(0, at, 2, 2).setIdentity();
          return j;
        },
        std::move(label)));
  };

  for (int t = 0; t < steps; ++t) {
    const HopperStep& st = out.steps[t];
    const std::string s = std::to_string(t);
    const int d = st.state.dim;

    // m a - f - m g_vec = 0 with g_vec = (0, -g)
    graph.add_equality(EqualityFactor(
        {st.state}, 2,
        [m, g](const Vector& x) -> Vector {
          Vector r = m * x.segment<2>(kA) - x.segment<2>(kF);
          r[1] += m * g;
          return r;
        },
        [m, d](const Vector&) -> Matrix {
          Matrix j = Matrix::Zero(2, d);
          j.block(0, kA, 2, 2) = m * Matrix::Identity(2, 2);
          j.block(0, kF, 2, 2) = -Matrix::Identity(2, 2);
          return j;
        },
        "newton" + s));

    if (t == 0) {
      pin(st, kP, start, "start_position");
      pin(st, kV, Eigen::Vector2d::Zero(), "start_velocity");
    }
    if (t == steps - 1) {
      pin(st, kA, Eigen::Vector2d::Zero(), "rest_acceleration");
      if (steps > 1) pin(st, kV, Eigen::Vector2d::Zero(), "rest_velocity");
    }

    if (st.phase == Phase::kStance) {
      graph.add_equality(EqualityFactor(
          {st.state}, 1, [](const Vector& x) { return Vector::Constant(1, x[kC + 1]); },
          [d](const Vector&) -> Matrix {
            Matrix j = Matrix::Zero(1, d);
            j(0, kC + 1) = 1.0;
            return j;
          },
          "ground" + s));

      const double mu = params.friction;
      graph.add_inequality(InequalityFactor(
          {st.state}, 2,
          [mu](const Vector& x) -> Vector {
            Vector r(2);
            r << mu * x[kF + 1] - x[kF], mu * x[kF + 1] + x[kF];
            return r;
          },
          [mu, d](const Vector&) -> Matrix {
            Matrix j = Matrix::Zero(2, d);
            j.block(0, kF, 2, 2) << -1.0, mu, 1.0, mu;
            return j;
          },
          "friction" + s));

      const double fmax = params.max_force;
      graph.add_inequality(InequalityFactor(
          {st.state}, 1, [fmax](const Vector& x) { return Vector::Constant(1, fmax - x[kF + 1]); },
          [d](const Vector&) -> Matrix {
            Matrix j = Matrix::Zero(1, d);
            j(0, kF + 1) = -1.0;
            return j;
          },
          "force_limit" + s));

      const double lmin2 = params.leg_min * params.leg_min;
      const double lmax2 = params.leg_max * params.leg_max;
      graph.add_inequality(InequalityFactor(
          {st.state}, 2,
          [lmin2, lmax2](const Vector& x) -> Vector {
            const double len2 = (x.segment<2>(kP) - x.segment<2>(kC)).squaredNorm();
            Vector r(2);
            r << lmax2 - len2, len2 - lmin2;
            return r;
          },
          [d](const Vector& x) -> Matrix {
            const Eigen::Vector2d leg = x.segment<2>(kP) - x.segment<2>(kC);
            Matrix j = Matrix::Zero(2, d);
            j.block(0, kP, 1, 2) = -2.0 * leg.transpose();
            j.block(0, kC, 1, 2) = 2.0 * leg.transpose();
            j.block(1, kP, 1, 2) = 2.0 * leg.transpose();
            j.block(1, kC, 1, 2) = -2.0 * leg.transpose();
            return j;
          },
          "leg" + s));
    } else {
      pin(st, kF, Eigen::Vector2d::Zero(), "airborne" + s);
      const double h = params.obstacle;
      graph.add_inequality(InequalityFactor(
          {st.state}, 1, [h](const Vector& x) { return Vector::Constant(1, x[kP + 1] - h); },
          [d](const Vector&) -> Matrix {
            Matrix j = Matrix::Zero(1, d);
            j(0, kP + 1) = 1.0;
            return j;
          },
          "clearance" + s));
    }
  }

  // Costs. Two-step factors see the stacked input (x_t, x_t+1).
  const double dt = params.dt;
  const double sc = std::sqrt(params.w_collocation);
  const double sj = std::sqrt(params.w_jerk);
  const double sf = std::sqrt(params.w_foot);
  for (int t = 0; t + 1 < steps; ++t) {
    const HopperStep& a = out.steps[t];
    const HopperStep& b = out.steps[t + 1];
    const int da = a.state.dim;
    const int width = da + b.state.dim;
    const std::string s = std::to_string(t);

    graph.add_cost(CostFactor(
        {a.state, b.state}, 4,
        [sc, dt, da](const Vector& z) -> Vector {
          Vector r(4);
          r.head<2>() = z.segment<2>(da + kP) - z.segment<2>(kP) - 0.5 * dt * (z.segment<2>(kV) + z.segment<2>(da + kV));
          r.tail<2>() = z.segment<2>(da + kV) - z.segment<2>(kV) - 0.5 * dt * (z.segment<2>(kA) + z.segment<2>(da + kA));
          return sc * r;
        },
        [sc, dt, da, width](const Vector&) -> Matrix {
          const Matrix id = Matrix::Identity(2, 2);
          Matrix j = Matrix::Zero(4, width);
          j.block(0, kP, 2, 2) = -id;
          j.block(0, kV, 2, 2) = -0.5 * dt * id;
          j.block(0, da + kP, 2, 2) = id;
          j.block(0, da + kV, 2, 2) = -0.5 * dt * id;
          j.block(2, kV, 2, 2) = -id;
          j.block(2, kA, 2, 2) = -0.5 * dt * id;
          j.block(2, da + kV, 2, 2) = id;
          j.block(2, da + kA, 2, 2) = -0.5 * dt * id;
          return sc * j;
        },
        "collocation" + s));

    auto difference = [&](int at, double weight, std::string label) {
      graph.add_cost(CostFactor(
          {a.state, b.state}, 2,
          [weight, da, at](const Vector& z) -> Vector { return weight * (z.segment<2>(da + at) - z.segment<2>(at)); },
          [weight, da, at, width](const Vector&) -> Matrix {
            Matrix j = Matrix::Zero(2, width);
            j.block(0, at, 2, 2) = -weight * Matrix::Identity(2, 2);
            j.block(0, da + at, 2, 2) = weight * Matrix::Identity(2, 2);
            return j;
          },
          std::move(label)));
    };
    difference(kA, sj, "jerk" + s);
    if (a.phase == Phase::kStance && b.phase == Phase::kStance) difference(kC, sf, "foot" + s);
  }

  auto segment_cost = [&graph](const HopperStep& st, int at, double weight, const Eigen::Vector2d& target,
                               std::string label) {
    const int d = st.state.dim;
    graph.add_cost(CostFactor(
        {st.state}, 2, [weight, at, target](const Vector& x) -> Vector { return weight * (x.segment<2>(at) - target); },
        [weight, at, d](const Vector&) -> Matrix {
          Matrix j = Matrix::Zero(2, d);
          j.block(0, at, 2, 2) = weight * Matrix::Identity(2, 2);
          return j;
        },
        std::move(label)));
  };
  const double se = std::sqrt(params.w_effort);
  for (int t = 0; t < steps; ++t) segment_cost(out.steps[t], kF, se, Eigen::Vector2d::Zero(), "effort" + std::to_string(t));
  segment_cost(out.steps.back(), kP, std::sqrt(params.w_goal), goal, "goal");

  // Nominal standing pose; everything that moves starts at zero.
  std::mt19937_64 rng(params.seed);
  for (const auto& st : out.steps) {
    Vector x = Vector::Zero(st.state.dim);
    x.segment<2>(kP) = start;
    p.initial.insert(st.state, jitter(x, params.init_noise, rng));
  }
  return out;
}

std::vector<std::string> problem_names() {
  return {"half_sphere", "corner_top", "corner_bottom", "corner_pinned", "hopper"};
}

namespace {

class OverrideReader {
 public:
  OverrideReader(const ParamOverrides& overrides) : overrides_(overrides) {}

  void read(const std::string& key, double& target) {
    known_.insert(key);
    if (auto it = overrides_.find(key); it != overrides_.end()) target = it->second;
  }

  void read(const std::string& key, int& target) {
    double v = target;
    read(key, v);
    if (v != std::floor(v)) throw PreconditionError("parameter '" + key + "' must be an integer");
    target = static_cast<int>(v);
  }

  void finish(const std::string& problem) const {
    for (const auto& [key, value] : overrides_) {
      if (!known_.count(key)) throw PreconditionError("unknown parameter '" + key + "' for problem " + problem);
    }
  }

 private:
  const ParamOverrides& overrides_;
  std::set<std::string> known_;
};

}  // namespace

Problem make_problem(const std::string& name, const ParamOverrides& overrides, std::uint64_t seed) {
  OverrideReader reader(overrides);
  if (name == "half_sphere") {
    HalfSphereParams params;
    params.seed = seed;
    reader.read("w_g", params.gravity_weight);
    reader.read("w_a", params.attraction_weight);
    reader.read("px", params.remote_point.x());
    reader.read("py", params.remote_point.y());
    reader.read("pz", params.remote_point.z());
    reader.read("x0", params.initial.x());
    reader.read("y0", params.initial.y());
    reader.read("z0", params.initial.z());
    reader.read("init_noise", params.init_noise);
    reader.finish(name);
    return half_sphere_problem(params);
  }
  if (name == "corner_top" || name == "corner_bottom" || name == "corner_pinned") {
    double noise = 0.0;
    reader.read("init_noise", noise);
    reader.finish(name);
    Problem p = name == "corner_pinned" ? corner_pinned_problem()
                : name == "corner_top"  ? corner_manifold_problems().top
                                        : corner_manifold_problems().bottom;
    if (noise > 0.0) {
      std::mt19937_64 rng(seed);
      const VariableKey x = p.graph.variables()[0];
      p.initial.insert(x, jitter(p.initial.at(x), noise, rng));
    }
    return p;
  }
  if (name == "hopper") {
    HopperParams params;
    params.seed = seed;
    reader.read("T", params.steps);
    reader.read("dt", params.dt);
    reader.read("mass", params.mass);
    reader.read("gravity", params.gravity);
    reader.read("friction", params.friction);
    reader.read("max_force", params.max_force);
    reader.read("leg_min", params.leg_min);
    reader.read("leg_max", params.leg_max);
    reader.read("height", params.height);
    reader.read("goal_x", params.goal_x);
    reader.read("obstacle", params.obstacle);
    reader.read("w_collocation", params.w_collocation);
    reader.read("w_effort", params.w_effort);
    reader.read("w_jerk", params.w_jerk);
    reader.read("w_foot", params.w_foot);
    reader.read("w_goal", params.w_goal);
    reader.read("init_noise", params.init_noise);
    reader.finish(name);
    return hopper_problem(params).problem;
  }
  throw PreconditionError("unknown problem '" + name + "'");
}

}  // namespace cmcopt
