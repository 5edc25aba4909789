#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cmcopt/types.hpp"

namespace cmcopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad dimension, non-tangent step, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A variable required by a factor has no value assigned.
class MissingValueError : public Error {
 public:
  using Error::Error;
};

/// An inequality row is violated beyond the activity tolerance.
class InfeasiblePointError : public Error {
 public:
  InfeasiblePointError(int row, double value);

  int row() const { return row_; }
  double value() const { return value_; }

 private:
  int row_;
  double value_;
};

/// Identifies one row of the stacked constraint Jacobian [dh; dg_active].
struct ConstraintRow {
  bool equality = true;
  int index = 0;  // row within h, or row within g

  friend bool operator==(const ConstraintRow&, const ConstraintRow&) = default;
};

struct RankReport {
  bool ok = true;
  int rank = 0;
  int expected = 0;
  Vector singular_values;
  std::vector<ConstraintRow> dependent_rows;
};

class RankDeficiencyError : public Error {
 public:
  explicit RankDeficiencyError(RankReport report);

  const RankReport& report() const { return report_; }

 private:
  RankReport report_;
};

/// The active-set QP hit its iteration cap.
class QpError : public Error {
 public:
  QpError(const std::string& what, double residual);

  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The metric projection subproblem did not converge. Carries the best iterate.
class RetractionError : public Error {
 public:
  RetractionError(const std::string& what, Vector best, double kkt_residual, double violation);

  const Vector& best_iterate() const { return best_; }
  double kkt_residual() const { return kkt_residual_; }
  double violation() const { return violation_; }

 private:
  Vector best_;
  double kkt_residual_;
  double violation_;
};

}  // namespace cmcopt
