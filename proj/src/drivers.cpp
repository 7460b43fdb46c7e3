#include "conic_palm/drivers.hpp"

#include "conic_palm/distances.hpp"
#include "conic_palm/errors.hpp"

#include <cmath>
#include <functional>

namespace conic_palm {

double PenaltySchedule::at(int k) const {
  switch (kind) {
    case ScheduleKind::kConstant:
      return c0;
    case ScheduleKind::kGeometric:
      return std::min(c_max, c0 * std::pow(rho, k));
    case ScheduleKind::kUnbounded:
      return c0 * std::pow(rho, k);
  }
  return c0;
}

void PenaltySchedule::validate() const {
  if (!(c0 > 0.0)) throw InputError("penalty c0 must be positive");
  if (kind != ScheduleKind::kConstant && !(rho > 1.0)) {
    throw InputError("penalty growth factor rho must exceed 1");
  }
  if (kind == ScheduleKind::kGeometric && !(c_max >= c0)) {
    throw InputError("c_max must be at least c0");
  }
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant:
      return "constant";
    case ScheduleKind::kGeometric:
      return "geometric";
    case ScheduleKind::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "geometric") return ScheduleKind::kGeometric;
  if (name == "unbounded") return ScheduleKind::kUnbounded;
  throw InputError("unknown schedule '" + std::string(name) + "'");
}

void EpsRule::validate() const {
  if (!(sigma > 0.0)) throw InputError("eps rule sigma must be positive");
  if (!(theta > 0.0)) throw InputError("eps rule theta must be positive");
  if (!(eps_max > 0.0)) throw InputError("eps rule eps_max must be positive");
}

double eps_rule(const EpsRule& rule, double t) {
  if (t < 0.0 || std::isnan(t)) throw InputError("eps rule argument must be >= 0");
  if (t == 0.0) return 0.0;
  return std::min(rule.eps_max, rule.sigma * std::pow(t, 1.0 + rule.theta));
}

void RunConfig::validate() const {
  schedule.validate();
  eps.validate();
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  if (!(stop_tol >= 0.0)) throw InputError("stop tolerance must be >= 0");
  if (max_outer < 0) throw InputError("max_outer must be >= 0");
  if (!(c_increase > 1.0)) throw InputError("c_increase must exceed 1");
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kMaxOuter:
      return "max_outer";
    case RunStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

namespace {

TraceRecord describe(const ProblemInstance& problem, const Vector& x,
                     const Vector& lam, int k) {
  TraceRecord rec;
  rec.k = k;
  rec.x = x;
  rec.lam = lam;
  rec.r = kkt_residual(problem, x, lam);
  if (problem.reference) {
    rec.dist_primal = (x - problem.reference->x_bar).norm();
    rec.dist_dual = dist_to_multiplier_set(lam, problem.reference->multiplier_set);
    rec.dist_pd = *rec.dist_primal + *rec.dist_dual;
  }
  return rec;
}

Vector safeguard(Vector lam, const RunConfig& config) {
  if (config.multiplier_bound) {
    const double norm = lam.norm();
    if (norm > *config.multiplier_bound) lam *= *config.multiplier_bound / norm;
  }
  return lam;
}

double floor_at(const Subproblem& sub, const Vector& x, const RunConfig& config) {
  return config.eps_floor_factor > 0.0 ? precision_floor(sub, x, config.eps_floor_factor)
                                       : 0.0;
}

double inner_tolerance(const Subproblem& sub, const Vector& x, double r,
                       const RunConfig& config) {
  return std::max(eps_rule(config.eps, r), floor_at(sub, x, config));
}

std::string inner_failure(const SubproblemResult& res, int k, double c, double eps) {
  return "outer iteration " + std::to_string(k) + ": subproblem " +
         std::string(to_string(res.status)) + " after " +
         std::to_string(res.iterations) + " iterations (c=" + std::to_string(c) +
         ", eps=" + std::to_string(eps) + ", grad_norm=" + std::to_string(res.grad_norm) +
         ")";
}

StepResult alm_step(const ProblemInstance& problem, const Vector& x, const Vector& lam,
                    double c, const RunConfig& config, int k) {
  StepResult out{x, lam, describe(problem, x, lam, k), c};
  TraceRecord& rec = out.record;
  rec.c = c;
  if (rec.r <= config.stop_tol) {
    rec.terminal = true;
    return out;
  }
  const Subproblem sub(problem, lam, c, std::nullopt);
  rec.eps = inner_tolerance(sub, x, rec.r, config);
  const auto res = minimize(sub, rec.eps, x, config.inner);
  rec.inner_iterations = res.iterations;
  if (res.status != SubproblemStatus::kConverged) {
    throw StepError(inner_failure(res, k, c, rec.eps), rec);
  }
  out.x = res.x;
  out.lam = safeguard(multiplier_update(problem, res.x, lam, c), config);
  rec.step_norm = (out.x - x).norm() + (out.lam - lam).norm();
  // Logged only; the classical method applies no acceptance test.
  rec.accepted = rec.step_norm <= config.alpha * rec.r;
  return out;
}

using StepFn = std::function<StepResult(const ProblemInstance&, const Vector&,
                                        const Vector&, double, const RunConfig&, int)>;

Trace run(const char* method, const StepFn& step, const ProblemInstance& problem,
          const Vector& x0, const Vector& lam0, const RunConfig& config) {
  check_dimensions(problem, x0, lam0);
  config.validate();
  Trace trace;
  trace.method = method;
  trace.stop_tol = config.stop_tol;
  Vector x = x0;
  Vector lam = lam0;
  // INCREASE_C raises the penalty for all later iterations as well.
  double boost = 1.0;
  for (int k = 0;; ++k) {
    if (k == config.max_outer) {
      TraceRecord rec = describe(problem, x, lam, k);
      rec.c = boost * config.schedule.at(k);
      rec.terminal = rec.r <= config.stop_tol;
      trace.records.push_back(std::move(rec));
      trace.status = trace.records.back().terminal ? RunStatus::kConverged
                                                   : RunStatus::kMaxOuter;
      break;
    }
    const double c = boost * config.schedule.at(k);
    StepResult res;
    try {
      res = step(problem, x, lam, c, config, k);
    } catch (const StepError& e) {
      trace.records.push_back(e.record());
      trace.status = RunStatus::kFailed;
      trace.message = e.what();
      break;
    }
    trace.records.push_back(res.record);
    if (res.record.terminal) {
      trace.status = RunStatus::kConverged;
      break;
    }
    boost *= res.c_used / c;
    x = std::move(res.x);
    lam = std::move(res.lam);
  }
  return trace;
}

}  // namespace

StepResult palm_step(const ProblemInstance& problem, const Vector& x, const Vector& lam,
                     double c, const RunConfig& config, int k) {
  check_dimensions(problem, x, lam);
  if (!(c > 0.0)) throw InputError("penalty parameter must be positive");
  StepResult out{x, lam, describe(problem, x, lam, k), c};
  TraceRecord& rec = out.record;
  rec.c = c;
  if (rec.r <= config.stop_tol) {
    rec.terminal = true;
    return out;
  }
  rec.eps = inner_tolerance(Subproblem(problem, lam, c, x), x, rec.r, config);
  double eps = rec.eps;
  int tightened = 0;
  int increased = 0;
  int inner_total = 0;
  for (;;) {
    const auto res = solve_subproblem(problem, lam, c, x, eps, x, config.inner);
    inner_total += res.iterations;
    rec.inner_iterations = inner_total;
    if (res.status != SubproblemStatus::kConverged) {
      throw StepError(inner_failure(res, k, c, eps), rec);
    }
    const Vector lam_next = safeguard(multiplier_update(problem, res.x, lam, c), config);
    const double step_norm = (res.x - x).norm() + (lam_next - lam).norm();
    if (step_norm <= config.alpha * rec.r) {
      out.x = res.x;
      out.lam = lam_next;
      out.c_used = c;
      rec.c = c;
      rec.eps = eps;
      rec.step_norm = step_norm;
      rec.accepted = true;
      return out;
    }
    const double floor = floor_at(Subproblem(problem, lam, c, x), x, config);
    const bool may_tighten = config.on_reject == RejectPolicy::kRetryTighter &&
                             tightened < config.max_tighten && eps / 10.0 >= floor;
    const bool may_increase = config.on_reject != RejectPolicy::kAbort &&
                              increased < config.max_c_increase;
    if (may_tighten) {
      eps /= 10.0;
      ++tightened;
    } else if (may_increase) {
      c *= config.c_increase;
      ++increased;
      eps = std::max(eps, floor_at(Subproblem(problem, lam, c, x), x, config));
    } else {
      throw StepError("outer iteration " + std::to_string(k) +
                          ": step rejected by the acceptance test (step " +
                          std::to_string(step_norm) + " > alpha*r = " +
                          std::to_string(config.alpha * rec.r) + ")",
                      rec);
    }
  }
}

Trace run_palm(const ProblemInstance& problem, const Vector& x0, const Vector& lam0,
               const RunConfig& config) {
  return run("palm", palm_step, problem, x0, lam0, config);
}

Trace run_alm(const ProblemInstance& problem, const Vector& x0, const Vector& lam0,
              const RunConfig& config) {
  return run("alm", alm_step, problem, x0, lam0, config);
}

}  // namespace conic_palm
