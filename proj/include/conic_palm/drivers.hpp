#pragma once

#include "conic_palm/subsolver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conic_palm {

enum class ScheduleKind { kConstant, kGeometric, kUnbounded };

/// Penalty sequence c_k.
struct PenaltySchedule {
  ScheduleKind kind = ScheduleKind::kGeometric;
  double c0 = 10.0;
  double rho = 2.0;
  double c_max = 1e6;

  static PenaltySchedule constant(double c) { return {ScheduleKind::kConstant, c, 1.0, c}; }
  static PenaltySchedule geometric(double c0, double rho, double c_max) {
    return {ScheduleKind::kGeometric, c0, rho, c_max};
  }
  static PenaltySchedule unbounded(double c0, double rho) {
    return {ScheduleKind::kUnbounded, c0, rho, 0.0};
  }

  double at(int k) const;
  void validate() const;
};

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// eps(t) = min(eps_max, sigma * t^(1 + theta)), which is o(t) for theta > 0.
struct EpsRule {
  double sigma = 1.0;
  double theta = 0.5;
  double eps_max = 1e-2;

  void validate() const;
};

double eps_rule(const EpsRule& rule, double t);

enum class RejectPolicy { kRetryTighter, kIncreaseC, kAbort };

struct RunConfig {
  PenaltySchedule schedule;
  EpsRule eps;
  /// Acceptance constant: a step is accepted when
  /// ||x+ - x|| + ||lam+ - lam|| <= alpha * r(x, lam).
  double alpha = 1e3;
  double stop_tol = 1e-10;
  int max_outer = 100;
  RejectPolicy on_reject = RejectPolicy::kRetryTighter;
  /// Retries with eps/10 before RETRY_TIGHTER falls through to INCREASE_C.
  int max_tighten = 3;
  /// Penalty increases (by factor `c_increase`) before a step gives up.
  int max_c_increase = 3;
  double c_increase = 10.0;
  /// Inner tolerances never go below this multiple of the subproblem's
  /// double-precision gradient floor (see precision_floor). 0 disables.
  double eps_floor_factor = 10.0;
  /// Optional clipping of multipliers to this Euclidean norm. Off when unset.
  std::optional<double> multiplier_bound;
  SubsolverLimits inner;

  void validate() const;
};

struct TraceRecord {
  int k = 0;
  /// The iterate (x^k, lam^k) the record describes.
  Vector x;
  Vector lam;
  double c = 0.0;
  double eps = 0.0;
  /// r(x^k, lam^k), evaluated before the step.
  double r = 0.0;
  double step_norm = 0.0;
  bool accepted = false;
  bool terminal = false;
  int inner_iterations = 0;
  std::optional<double> dist_primal;
  std::optional<double> dist_dual;
  std::optional<double> dist_pd;
};

enum class RunStatus { kConverged, kMaxOuter, kFailed };

std::string_view to_string(RunStatus status);

struct Trace {
  std::string method;
  double stop_tol = 0.0;
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::kMaxOuter;
  std::string message;

  const TraceRecord& last() const { return records.back(); }
};

/// A step could not produce an acceptable iterate. Carries the record of the
/// iterate it started from, which is the best one known.
class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, TraceRecord record)
      : std::runtime_error(what), record_(std::move(record)) {}
  const TraceRecord& record() const { return record_; }

 private:
  TraceRecord record_;
};

struct StepResult {
  Vector x;
  Vector lam;
  TraceRecord record;
  /// Penalty actually used; exceeds the scheduled c after INCREASE_C.
  double c_used = 0.0;
};

/// One inexact PALM step from (x, lam) with penalty c. When r(x, lam) <=
/// stop_tol the iterate is returned unchanged with a terminal record.
StepResult palm_step(const ProblemInstance& problem, const Vector& x,
                     const Vector& lam, double c, const RunConfig& config,
                     int k = 0);

/// Inexact PALM until r <= stop_tol or max_outer steps. Never throws on step
/// failure; the trace then ends at the failing iterate with status kFailed.
Trace run_palm(const ProblemInstance& problem, const Vector& x0,
               const Vector& lam0, const RunConfig& config);

/// Classical inexact ALM: no proximal term and no acceptance test.
Trace run_alm(const ProblemInstance& problem, const Vector& x0,
              const Vector& lam0, const RunConfig& config);

}  // namespace conic_palm
