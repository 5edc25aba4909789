#include "cmcopt/errors.hpp"

#include <sstream>

namespace cmcopt {

namespace {

std::string describe_infeasible(int row, double value) {
  std::ostringstream os;
  os << "infeasible point: inequality row " << row << " evaluates to " << value;
  return os.str();
}

std::string describe_rank(const RankReport& report) {
  std::ostringstream os;
  os << "constraint Jacobian rank " << report.rank << " < " << report.expected << "; dependent rows:";
  for (const auto& row : report.dependent_rows) {
    os << ' ' << (row.equality ? 'h' : 'g') << row.index;
  }
  return os.str();
}

}  // namespace

InfeasiblePointError::InfeasiblePointError(int row, double value)
    : Error(describe_infeasible(row, value)), row_(row), value_(value) {}

RankDeficiencyError::RankDeficiencyError(RankReport report)
    : Error(describe_rank(report)), report_(std::move(report)) {}

QpError::QpError(const std::string& what, double residual) : Error(what), residual_(residual) {}

RetractionError::RetractionError(const std::string& what, Vector best, double kkt_residual,
                                 double violation)
    : Error(what), best_(std::move(best)), kkt_residual_(kkt_residual), violation_(violation) {}

}  // namespace cmcopt
