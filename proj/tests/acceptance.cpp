// Acceptance run: one PASS/FAIL line per criterion.
// `acceptance --oracle` prints the measured tail ratios used for the pins.

#include "cone_properties.hpp"
#include "conic_palm/analysis.hpp"
#include "conic_palm/subsolver.hpp"
#include "support.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>

using namespace conic_palm;
using conic_palm::testing::vec;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------- shared runs

constexpr double kConstantC = 10.0;
constexpr int kStartsPerProblem = 5;
constexpr double kStartRadius = 0.05;

/// Max tail ratio of constant-penalty PALM runs from each start, pinned from
/// the oracle run (`--oracle`); asserted with +-0.1 slack.
const std::map<std::string, double> kPinnedQ = {
    {"nlp-degenerate", 0.0769},
    {"eq-quadratic", 0.1701},
    {"soc-degenerate", 0.1814},
    {"nlp-nonconvex", 0.2203},
};
constexpr double kPinSlack = 0.1;

std::vector<std::pair<Vector, Vector>> starts_near_reference(const ProblemInstance& p,
                                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& ref = *p.reference;
  Vector center(p.n + p.m);
  center << ref.x_bar, ref.lambda_bar;
  std::vector<std::pair<Vector, Vector>> out;
  while (static_cast<int>(out.size()) < kStartsPerProblem) {
    const Vector z = sample_ball(center, kStartRadius, rng);
    const Vector x = z.head(p.n);
    const Vector lam = z.tail(p.m);
    if (kkt_residual(p, x, lam) == 0.0) continue;
    out.emplace_back(x, lam);
  }
  return out;
}


/// Traces of criteria 6 and 7, kept for the invariant check of criterion 9.
std::vector<std::pair<ProblemInstance, Trace>>& recorded() {
  static std::vector<std::pair<ProblemInstance, Trace>> traces;
  return traces;
}

RunConfig constant_config() {
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::constant(kConstantC);
  return cfg;
}

RunConfig unbounded_config() {
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::unbounded(kConstantC, 4.0);
  return cfg;
}

/// Max q_max_tail over constant-penalty runs from starts near the reference.
/// Returns NaN when a run fails to converge.
double measured_q(const ProblemInstance& p, bool record) {
  double worst = 0.0;
  for (const auto& [x0, lam0] : starts_near_reference(p, 6)) {
    Trace trace = run_palm(p, x0, lam0, constant_config());
    if (trace.status != RunStatus::kConverged) return std::nan("");
    worst = std::max(worst, estimate_rates(trace).q_max_tail);
    if (record) recorded().emplace_back(p, std::move(trace));
  }
  return worst;
}

// ----------------------------------------------------------------- criteria

Outcome cone_correctness() {
  int failures = 0;
  std::uint64_t seed = 101;
  std::string where;
  for (const auto& cone : testing::property_cones()) {
    const auto f = testing::cone_property_failures(cone, 1000, seed++);
    if (f.total() > 0) where += " cone(dim " + std::to_string(cone.total_dim()) + ")";
    failures += f.total();
  }
  return {failures == 0, "1000 samples x 6 cones, failures=" + std::to_string(failures) + where};
}

Outcome kkt_fidelity() {
  bool ok = true;
  std::string detail;
  for (const auto& name : registry_names()) {
    const auto p = registry_get(name);
    double worst = 0.0;
    for (const auto& lam : sample_multipliers(p.reference->multiplier_set, 100, 2)) {
      worst = std::max(worst, kkt_residual(p, p.reference->x_bar, lam));
    }
    const auto rep = check_residual_upper_bound(p, 0.1, 200, 2);
    ok = ok && worst <= 1e-9 && rep.passed && std::isfinite(rep.fitted) && rep.spread <= 0.2;
    detail += name + ": max r=" + fmt(worst) + " kappa_hat=" + fmt(rep.fitted) +
              " spread=" + fmt(rep.spread) + "; ";
  }
  return {ok, detail};
}

Outcome subproblem_contract() {
  const auto toy = testing::scalar_toy();
  const auto t = solve_subproblem(toy, vec({1}), 1.0, vec({0}), 1e-10, vec({0}));
  const double toy_err = std::abs(t.x(0) + 1.0 / 3.0);

  const auto p1 = registry_get("nlp-degenerate");
  const Vector lam = vec({0.5, 0.5});
  const Vector v = vec({0.05, 0.05});
  const Subproblem sub(p1, lam, 10.0, v);
  const auto res = solve_subproblem(p1, lam, 10.0, v, 1e-8, v);
  // Grid over [-0.5, 0.5]^2 then a shrinking pattern search.
  double best = std::numeric_limits<double>::infinity();
  Vector arg(2);
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; ++j) {
      const Vector x = vec({0.0025 * i, 0.0025 * j});
      if (const double val = sub.value(x); val < best) {
        best = val;
        arg = x;
      }
    }
  }
  for (double step = 0.0025; step > 1e-12; step *= 0.5) {
    for (bool moved = true; moved;) {
      moved = false;
      for (int d = 0; d < 8; ++d) {
        const Vector x = arg + step * vec({std::cos(d * M_PI / 4), std::sin(d * M_PI / 4)});
        if (const double val = sub.value(x); val < best) {
          best = val;
          arg = x;
          moved = true;
        }
      }
    }
  }
  const double grid_err = (res.x - arg).norm();

  // Tolerance contract across many solves.
  std::mt19937_64 rng(3);
  int converged = 0, broken = 0;
  for (const auto& name : registry_names()) {
    const auto p = registry_get(name);
    for (int i = 0; i < 100; ++i) {
      const Vector l = p.reference->lambda_bar + testing::gaussian(p.m, rng, 0.3);
      const Vector c = p.reference->x_bar + testing::gaussian(p.n, rng, 0.3);
      const double eps = std::pow(10.0, -3 - i % 8);
      const auto r = solve_subproblem(p, l, std::pow(10.0, i % 3), c, eps, c);
      if (r.status == SubproblemStatus::kConverged) {
        ++converged;
        if (r.grad_norm > eps) ++broken;
      }
    }
  }
  const bool ok = t.status == SubproblemStatus::kConverged && toy_err <= 1e-9 &&
                  res.status == SubproblemStatus::kConverged && grid_err <= 1e-6 &&
                  broken == 0;
  return {ok, "toy err=" + fmt(toy_err) + " grid err=" + fmt(grid_err) + " converged=" +
                  std::to_string(converged) + "/500 contract breaches=" + std::to_string(broken)};
}

Outcome quadratic_growth() {
  bool ok = true;
  std::string detail;
  for (const auto* name : {"nlp-degenerate", "eq-quadratic", "soc-degenerate", "nlp-nonconvex"}) {
    const auto rep = check_quadratic_growth(registry_get(name), {kConstantC, 10 * kConstantC},
                                            0.02, 200, 0.0, 4);
    ok = ok && rep.passed && rep.violations == 0 && rep.fitted > 0.0 && rep.spread <= 0.3;
    detail += std::string(name) + ": kappa=" + fmt(rep.fitted) + " spread=" + fmt(rep.spread) + "; ";
  }
  return {ok, detail};
}

Outcome empirical_constants() {
  bool ok = true;
  std::string detail;
  const std::vector<double> c_list{kConstantC, 10 * kConstantC};
  for (const auto* name : {"nlp-degenerate", "eq-quadratic", "nlp-nonconvex"}) {
    const auto p = registry_get(name);
    const auto tau = check_error_bound(p, 0.05, 200, 5);
    const auto lhat = check_subproblem_calmness(p, c_list, 0.05, 200, 5);
    const auto alpha = check_step_error_bound(p, c_list, 0.02, 200, 5);
    for (const auto* rep : {&tau, &lhat, &alpha}) {
      ok = ok && rep->passed && rep->violations == 0 && std::isfinite(rep->fitted) &&
           rep->samples >= 200;
    }
    detail += std::string(name) + ": tau=" + fmt(tau.fitted) + " l_hat=" + fmt(lhat.fitted) +
              " alpha=" + fmt(alpha.fitted) + "; ";
  }
  return {ok, detail};
}

Outcome q_linear() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, pin] : kPinnedQ) {
    const double q = measured_q(registry_get(name), true);
    ok = ok && std::isfinite(q) && q < 1.0 && std::abs(q - pin) <= kPinSlack;
    detail += name + ": q+=" + fmt(q) + " (pin " + fmt(pin) + "); ";
  }
  return {ok, detail};
}

Outcome q_superlinear() {
  bool ok = true;
  std::string detail;
  for (const auto* name : {"nlp-degenerate", "eq-quadratic"}) {
    const auto p = registry_get(name);
    Trace trace = run_palm(p, *p.default_x0, *p.default_lam0, unbounded_config());
    const bool converged = trace.status == RunStatus::kConverged;
    const auto rates = converged ? estimate_rates(trace) : RateReport{};
    ok = ok && converged && rates.superlinear_flag;
    detail += std::string(name) + ": final q=" +
              (rates.q_factors.empty() ? std::string("-") : fmt(rates.q_factors.back())) + "; ";
    recorded().emplace_back(p, std::move(trace));
  }
  return {ok, detail};
}

Outcome multiplier_set_limits() {
  const auto p1 = registry_get("nlp-degenerate");
  const Vector x0 = vec({0.02, 0.02});
  std::vector<Vector> limits;
  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < 10; ++i) {
    const double t = 0.05 + 0.1 * i;
    const Vector lam0 = vec({t, 1.0 - t}) + vec({0.03, -0.01});
    const auto trace = run_palm(p1, x0, lam0, constant_config());
    ok = ok && trace.status == RunStatus::kConverged;
    worst = std::max(worst, *trace.last().dist_dual);
    limits.push_back(trace.last().lam);
  }
  double spread = 0.0;
  for (const auto& a : limits) {
    for (const auto& b : limits) spread = std::max(spread, (a - b).norm());
  }
  ok = ok && worst <= 1e-7 && spread >= 1e-3;
  return {ok, "max dist(lam_hat, Lambda)=" + fmt(worst) + " max separation=" + fmt(spread)};
}

Outcome inclusion_invariant() {
  int steps = 0, breaches = 0;
  for (const auto& [p, trace] : recorded()) {
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
      const auto& rec = trace.records[k];
      if (!rec.accepted) continue;
      ++steps;
      const auto& next = trace.records[k + 1];
      const double incl =
          (lagrangian_grad_x(p, next.x, next.lam) + (next.x - rec.x) / rec.c).norm();
      if (incl > rec.eps || rec.step_norm > RunConfig{}.alpha * rec.r) ++breaches;
    }
  }
  return {steps > 0 && breaches == 0 && !recorded().empty(),
          std::to_string(recorded().size()) + " traces, " + std::to_string(steps) +
              " accepted steps, breaches=" + std::to_string(breaches)};
}

std::string capture(const std::string& command) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) return "<popen failed>";
  std::string out;
  std::array<char, 4096> buf{};
  while (const std::size_t n = fread(buf.data(), 1, buf.size(), pipe.get())) out.append(buf.data(), n);
  return out;
}

Outcome cli_determinism(const std::string& exe) {
  if (exe.empty()) return {false, "CLI executable path not given"};
  const std::vector<std::string> invocations{
      "solve --problem soc-degenerate --seed 7",
      "verify --problem nlp-degenerate --seed 7 --samples 100",
      "rates --problem eq-quadratic --seed 7",
  };
  bool ok = true;
  std::string detail;
  for (const auto& args : invocations) {
    const std::string cmd = "'" + exe + "' " + args + " 2>&1";
    const auto a = capture(cmd);
    const auto b = capture(cmd);
    const bool same = a == b && !a.empty();
    ok = ok && same;
    detail += args.substr(0, args.find(' ')) + (same ? ": identical (" : ": DIFFERENT (") +
              std::to_string(a.size()) + " bytes); ";
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::string exe;
  bool oracle = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--oracle") {
      oracle = true;
    } else {
      exe = arg;
    }
  }
  if (oracle) {
    for (const auto& [name, pin] : kPinnedQ) {
      std::cout << name << " " << measured_q(registry_get(name), false) << '\n';
    }
    return 0;
  }

  const std::vector<Criterion> criteria{
      {1, "cone correctness", 10, cone_correctness},
      {2, "KKT fidelity", 10, kkt_fidelity},
      {3, "subproblem contract", 30, subproblem_contract},
      {4, "quadratic growth", 60, quadratic_growth},
      {5, "error bound, calmness and step bound constants", 120, empirical_constants},
      {6, "Q-linear rate under a constant penalty", 60, q_linear},
      {7, "Q-superlinear rate under an unbounded penalty", 60, q_superlinear},
      {8, "limit multipliers spread over the multiplier set", 60, multiplier_set_limits},
      {9, "iterate inclusion invariant", 10, inclusion_invariant},
      {10, "CLI determinism", 120, [&] { return cli_determinism(exe); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit;
    const bool passed = out.passed && in_time;
    if (!passed) ++failed;
    std::cout << "criterion " << c.id << " " << (passed ? "PASS" : "FAIL") << " " << c.title
              << " [" << fmt(secs) << "s < " << c.time_limit << "s" << (in_time ? "" : " EXCEEDED")
              << "] " << out.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
