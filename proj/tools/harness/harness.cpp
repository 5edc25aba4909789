#include "harness.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"
#include "cmcopt/baselines.hpp"
#include "cmcopt/errors.hpp"
#include "json.hpp"

namespace cmcopt::harness {

namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << std::scientific << std::setprecision(16);
  return os;
}

SolverConfig solver_config(const RunOptions& options) {
  SolverConfig config;
  config.max_iters = options.max_iters;
  config.grad_tol = options.grad_tol;
  return config;
}

BaselineConfig baseline_config(const RunOptions& options) {
  BaselineConfig config;
  config.inner = solver_config(options);
  config.outer_iters = options.outer_iters;
  return config;
}

// Penalty and AL search all of R^N; CM-Opt keeps the equality manifolds only.
int method_dimension(const FactorGraph& graph, const ComponentPartition& partition, const std::string& solver) {
  if (solver == "penalty" || solver == "auglag") return graph.ambient_dim();
  if (solver == "cmopt") {
    FactorGraph eq = graph.without_constraints();
    for (const auto& h : graph.equalities()) eq.add_equality(h);
    return search_dimension(eq, eq.extract_components());
  }
  return search_dimension(graph, partition);
}

}  // namespace

std::vector<std::string> solver_names() { return {"rgd", "cmc_lm", "penalty", "auglag", "cmopt"}; }

bool is_solver(const std::string& name) {
  for (const auto& s : solver_names()) {
    if (s == name) return true;
  }
  return false;
}

RunOutput run_solver(const Problem& problem, const std::string& solver, const RunOptions& options) {
  if (!is_solver(solver)) throw PreconditionError("unknown solver '" + solver + "'");
  const FactorGraph& graph = problem.graph;
  const ComponentPartition partition = graph.extract_components();

  RunOutput out;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (solver == "rgd") {
      out.result = solve_rgd(graph, partition, problem.initial, solver_config(options));
    } else if (solver == "cmc_lm") {
      out.result = solve_lm(graph, partition, problem.initial, solver_config(options));
    } else if (solver == "penalty") {
      out.result = solve_penalty(graph, problem.initial, baseline_config(options));
    } else if (solver == "auglag") {
      out.result = solve_auglag(graph, problem.initial, baseline_config(options));
    } else {
      out.result = solve_cmopt(graph, problem.initial, baseline_config(options));
    }
  } catch (const Error& e) {
    out.result.status = SolveStatus::kRetractionFailure;
    out.result.message = e.what();
    out.result.final_values = problem.initial;
    out.summary.failed = true;
  }
  const auto stop = std::chrono::steady_clock::now();

  RunSummary& s = out.summary;
  s.problem = problem.name;
  s.method = solver;
  s.dimension = method_dimension(graph, partition, solver);
  s.ambient_dim = graph.ambient_dim();
  s.time_s = std::chrono::duration<double>(stop - start).count();
  s.violation = graph.total_violation(out.result.final_values);
  s.cost = graph.total_cost(out.result.final_values);
  s.iterations = out.result.history.empty() ? 0 : out.result.history.back().iter;
  s.status = to_string(out.result.status);
  if (out.result.status == SolveStatus::kRetractionFailure) s.failed = true;
  return out;
}

void write_log_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  std::ofstream os = open_out(path);
  os << "iter,cost,violation,grad_norm,step,accepted\n";
  for (const auto& r : history) {
    os << r.iter << ',' << r.cost << ',' << r.violation << ',' << r.grad_norm << ',' << r.step << ','
       << (r.accepted ? 1 : 0) << '\n';
  }
}

void write_final_json(const std::filesystem::path& path, const Problem& problem, const RunOutput& run) {
  json doc;
  doc["problem"] = run.summary.problem;
  doc["method"] = run.summary.method;
  doc["status"] = run.summary.status;
  doc["message"] = run.result.message;
  doc["cost"] = run.summary.cost;
  doc["violation"] = run.summary.violation;
  json vars = json::array();
  for (const auto& key : problem.graph.variables()) {
    json v;
    v["id"] = key.id;
    v["name"] = problem.graph.variable_name(key);
    const Vector& x = run.result.final_values.at(key);
    v["value"] = std::vector<double>(x.data(), x.data() + x.size());
    vars.push_back(std::move(v));
  }
  doc["variables"] = std::move(vars);
  std::ofstream os = open_out(path);
  os << doc.dump(2) << '\n';
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows) {
  std::ofstream os = open_out(path);
  os << "problem,method,dimension,ambient_dim,violation,cost,iterations,status\n";
  for (const auto& r : rows) {
    os << r.problem << ',' << r.method << ',' << r.dimension << ',' << r.ambient_dim << ',' << r.violation << ','
       << r.cost << ',' << r.iterations << ',' << r.status << '\n';
  }
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows) {
  std::ofstream os = open_out(path);
  os << "problem,method,time_s\n";
  for (const auto& r : rows) os << r.problem << ',' << r.method << ',' << r.time_s << '\n';
}

std::string summary_json(const RunSummary& r) {
  json doc;
  doc["problem"] = r.problem;
  doc["method"] = r.method;
  doc["dimension"] = r.dimension;
  doc["ambient_dim"] = r.ambient_dim;
  doc["time_s"] = r.time_s;
  doc["violation"] = r.violation;
  doc["cost"] = r.cost;
  doc["iterations"] = r.iterations;
  doc["status"] = r.status;
  return doc.dump();
}

void print_table(std::ostream& os, const std::vector<RunSummary>& rows) {
  const auto flags = os.flags();
  os << std::left << std::setw(10) << "method" << std::right << std::setw(10) << "dimension" << std::setw(12)
     << "time(s)" << std::setw(14) << "violation" << std::setw(16) << "cost" << "  status\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(10) << r.method << std::right << std::setw(10) << r.dimension << std::setw(12)
       << std::fixed << std::setprecision(3) << r.time_s << std::setw(14) << std::scientific << std::setprecision(2)
       << r.violation << std::setw(16) << std::setprecision(6) << r.cost << "  " << r.status << '\n';
  }
  os << "ambient dimension N = " << (rows.empty() ? 0 : rows.front().ambient_dim) << '\n';
  os.flags(flags);
}

std::vector<RunSummary> compare(const std::string& problem_name, const std::vector<std::string>& solvers,
                                const RunOptions& options, std::ostream& json_out) {
  const Problem problem = make_problem(problem_name, options.params, options.seed);
  std::vector<RunSummary> rows;
  for (const auto& solver : solvers) {
    RunOutput run = run_solver(problem, solver, options);
    const std::string stem = problem.name + "_" + solver;
    write_log_csv(options.out / (stem + "_log.csv"), run.result.history);
    write_final_json(options.out / (stem + "_final.json"), problem, run);
    json_out << summary_json(run.summary) << '\n';
    rows.push_back(run.summary);
  }
  write_summary_csv(options.out / "summary.csv", rows);
  write_timing_csv(options.out / "timing.csv", rows);
  return rows;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained optimization on manifolds with corners: benchmark harness"};
  app.require_subcommand(1);

  RunOptions options;
  std::vector<std::string> param_args;
  std::string out_dir = ".";
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--max-iters", options.max_iters, "Iteration cap (inner cap for baselines)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--grad-tol", options.grad_tol, "Stationarity threshold on the projected gradient")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", options.seed, "Seed for randomized initial guesses");
    sub->add_option("--outer-iters", options.outer_iters, "Outer iterations of the baselines")
        ->check(CLI::PositiveNumber);
    sub->add_option("--param", param_args, "Problem parameter override key=value (repeatable)");
    sub->add_option("--out", out_dir, "Output directory");
  };

  std::string problem;
  std::string solver;
  std::vector<std::string> solvers;
  CLI::App* run = app.add_subcommand("run", "Run one solver on one problem");
  run->add_option("problem", problem, "Problem name")->required();
  run->add_option("solver", solver, "Solver name")->required();
  add_flags(run);
  CLI::App* cmp = app.add_subcommand("compare", "Run several solvers on one problem instance");
  cmp->add_option("problem", problem, "Problem name")->required();
  cmp->add_option("solvers", solvers, "Solver names")->required();
  add_flags(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) solvers = {solver};
  for (const auto& s : solvers) {
    if (!is_solver(s)) {
      err << "unknown solver '" << s << "'\n";
      return 2;
    }
  }
  for (const auto& arg : param_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) {
      err << "--param expects key=value, got '" << arg << "'\n";
      return 2;
    }
    try {
      std::size_t used = 0;
      const std::string value = arg.substr(eq + 1);
      options.params[arg.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      err << "--param value is not a number: '" << arg << "'\n";
      return 2;
    }
  }
  options.out = out_dir;

  std::vector<RunSummary> rows;
  try {
    make_problem(problem, options.params, options.seed);
  } catch (const PreconditionError& e) {
    err << e.what() << '\n';
    return 2;
  }
  try {
    rows = compare(problem, solvers, options, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  print_table(err, rows);
  for (const auto& r : rows) {
    if (r.failed) return 1;
  }
  return 0;
}

}  // namespace cmcopt::harness
