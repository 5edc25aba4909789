#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmcopt/optimizer.hpp"
#include "cmcopt/problems.hpp"

namespace cmcopt::harness {

struct RunOptions {
  int max_iters = 5000;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
  int outer_iters = 8;  // baselines only
  ParamOverrides params;
  std::filesystem::path out = ".";
};

struct RunSummary {
  std::string problem;
  std::string method;
  int dimension = 0;     // search-space dimension
  int ambient_dim = 0;   // N
  double time_s = 0.0;
  double violation = 0.0;  // recomputed from the final values
  double cost = 0.0;
  int iterations = 0;
  std::string status;
  bool failed = false;
};

struct RunOutput {
  RunSummary summary;
  SolveResult result;
};

/// Registered solver names, in comparison order.
std::vector<std::string> solver_names();
bool is_solver(const std::string& name);

/// Runs one solver on one problem instance. Throws PreconditionError for
/// unknown solver names.
RunOutput run_solver(const Problem& problem, const std::string& solver, const RunOptions& options);

void write_log_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history);
void write_final_json(const std::filesystem::path& path, const Problem& problem, const RunOutput& run);
/// Deterministic columns only; wall time goes to write_timing_csv.
void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows);
void write_timing_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows);
std::string summary_json(const RunSummary& row);
void print_table(std::ostream& os, const std::vector<RunSummary>& rows);

/// Runs `solvers` on one problem, writes every artifact under options.out and
/// returns the rows. Artifacts of failed runs are still written.
std::vector<RunSummary> compare(const std::string& problem, const std::vector<std::string>& solvers,
                                const RunOptions& options, std::ostream& json_out);

/// Entry point of the command-line tool. Exit codes: 0 ok, 1 solver failure, 2 usage.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cmcopt::harness
