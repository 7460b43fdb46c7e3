#include "conic_palm/cli.hpp"

#include "conic_palm/errors.hpp"
#include "conic_palm/problem_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace conic_palm {

using nlohmann::json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
  };
  out << kTraceCsvHeader << '\n';
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << format_number(rec.c) << ',' << format_number(rec.eps) << ','
        << format_number(rec.r) << ',' << format_number(rec.step_norm) << ','
        << (rec.accepted ? 1 : 0) << ',' << rec.inner_iterations << ','
        << opt(rec.dist_primal) << ',' << opt(rec.dist_dual) << ',' << opt(rec.dist_pd)
        << '\n';
  }
}

namespace {

json vector_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

std::optional<RateReport> try_rates(const Trace& trace, std::string* why = nullptr) {
  try {
    return estimate_rates(trace);
  } catch (const InputError& e) {
    if (why) *why = e.what();
    return std::nullopt;
  }
}

}  // namespace

json trace_summary(const ProblemInstance& problem, const Trace& trace) {
  const auto& last = trace.last();
  json s;
  s["problem"] = problem.name;
  s["method"] = trace.method;
  s["status"] = std::string(to_string(trace.status));
  s["iterations"] = static_cast<int>(trace.records.size()) - 1;
  s["final_x"] = vector_json(last.x);
  s["final_lam"] = vector_json(last.lam);
  s["final_r"] = last.r;
  s["final_c"] = last.c;
  if (!trace.message.empty()) s["message"] = trace.message;
  if (last.dist_pd) {
    s["final_dist_primal"] = *last.dist_primal;
    s["final_dist_dual"] = *last.dist_dual;
    s["final_dist_pd"] = *last.dist_pd;
    std::string why;
    if (auto rates = try_rates(trace, &why)) {
      s["rates"] = to_json(*rates);
    } else {
      s["rates"] = nullptr;
      s["rates_note"] = why;
    }
  }
  return s;
}

namespace {

struct Options {
  std::string problem;
  std::string file;
  std::string method = "palm";
  std::string schedule = "geometric";
  double c = 10.0;
  std::optional<double> rho;
  double c_max = 1e6;
  double sigma = 1.0;
  double theta = 0.5;
  double alpha = 1e3;
  double tol = 1e-10;
  int max_outer = 100;
  std::string x0;
  std::string lam0;
  std::optional<std::uint64_t> seed;
  int samples = 200;
  double radius = 0.02;
  std::string out_path;
  std::string json_path;
};

void add_common(CLI::App& cmd, Options& o, bool run_flags) {
  cmd.add_option("--problem", o.problem, "Registry problem name");
  cmd.add_option("--file", o.file, "Problem JSON file");
  cmd.add_option("--c", o.c, "Penalty parameter (c0 for growing schedules)");
  cmd.add_option("--rho", o.rho, "Penalty growth factor");
  cmd.add_option("--c-max", o.c_max, "Penalty cap for the geometric schedule");
  cmd.add_option("--sigma", o.sigma, "Tolerance rule factor");
  cmd.add_option("--theta", o.theta, "Tolerance rule exponent excess");
  cmd.add_option("--alpha", o.alpha, "Acceptance constant");
  cmd.add_option("--tol", o.tol, "Stopping tolerance on the KKT residual");
  cmd.add_option("--max-outer", o.max_outer, "Outer iteration cap");
  cmd.add_option("--x0", o.x0, "Comma-separated primal start");
  cmd.add_option("--lam0", o.lam0, "Comma-separated dual start");
  cmd.add_option("--seed", o.seed, "Sampling seed (fallback: CONIC_PALM_SEED)");
  cmd.add_option("--samples", o.samples, "Samples per verification check");
  cmd.add_option("--radius", o.radius, "Sampling radius around the reference");
  cmd.add_option("--json", o.json_path, "Write JSON output here instead of stdout");
  if (run_flags) {
    cmd.add_option("--method", o.method, "palm or alm")
        ->check(CLI::IsMember({"palm", "alm"}));
    cmd.add_option("--schedule", o.schedule, "constant, geometric or unbounded")
        ->check(CLI::IsMember({"constant", "geometric", "unbounded"}));
    cmd.add_option("--out", o.out_path, "Write the trace CSV here instead of stdout");
  }
}

Vector parse_list(const std::string& text, Eigen::Index expected, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    while (begin != end && *begin == ' ') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw InputError(std::string(flag) + ": cannot parse '" + item + "'");
    }
    values.push_back(v);
  }
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw InputError(std::string(flag) + ": expected " + std::to_string(expected) +
                     " values, got " + std::to_string(values.size()));
  }
  return Eigen::Map<Vector>(values.data(), expected);
}

ProblemInstance load(const Options& o) {
  if (!o.problem.empty() && !o.file.empty()) {
    throw InputError("--problem and --file are mutually exclusive");
  }
  if (!o.file.empty()) return load_problem_file(o.file);
  if (o.problem.empty()) throw InputError("one of --problem or --file is required");
  return registry_get(o.problem);
}

std::pair<Vector, Vector> start_point(const ProblemInstance& p, const Options& o) {
  Vector x0 = !o.x0.empty()       ? parse_list(o.x0, p.n, "--x0")
              : p.default_x0      ? *p.default_x0
                                  : Vector::Zero(p.n);
  Vector lam0 = !o.lam0.empty()   ? parse_list(o.lam0, p.m, "--lam0")
                : p.default_lam0  ? *p.default_lam0
                                  : Vector::Zero(p.m);
  return {std::move(x0), std::move(lam0)};
}

RunConfig make_config(const Options& o, ScheduleKind kind, double default_rho) {
  RunConfig cfg;
  const double rho = o.rho.value_or(default_rho);
  switch (kind) {
    case ScheduleKind::kConstant:
      cfg.schedule = PenaltySchedule::constant(o.c);
      break;
    case ScheduleKind::kGeometric:
      cfg.schedule = PenaltySchedule::geometric(o.c, rho, o.c_max);
      break;
    case ScheduleKind::kUnbounded:
      cfg.schedule = PenaltySchedule::unbounded(o.c, rho);
      break;
  }
  cfg.eps.sigma = o.sigma;
  cfg.eps.theta = o.theta;
  cfg.alpha = o.alpha;
  cfg.stop_tol = o.tol;
  cfg.max_outer = o.max_outer;
  cfg.validate();
  return cfg;
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("CONIC_PALM_SEED")) {
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto res = std::from_chars(env, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw InputError("CONIC_PALM_SEED must be a non-negative integer");
    }
    return v;
  }
  return 1;
}

// Writes to `path` or, when empty, to `fallback`.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  write(f);
}

void emit_json(const std::string& path, std::ostream& fallback, const json& j) {
  emit(path, fallback, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

int cmd_list(std::ostream& out) {
  for (const auto& name : registry_names()) {
    const auto p = registry_get(name);
    out << name << "  n=" << p.n << " m=" << p.m << " cone=" << to_json(p.cone).dump()
        << '\n';
  }
  return 0;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const auto problem = load(o);
  const auto [x0, lam0] = start_point(problem, o);
  const auto cfg = make_config(o, schedule_kind_from_string(o.schedule), 2.0);
  const Trace trace = o.method == "alm" ? run_alm(problem, x0, lam0, cfg)
                                        : run_palm(problem, x0, lam0, cfg);
  emit(o.out_path, out, [&](std::ostream& os) { write_trace_csv(trace, os); });
  emit_json(o.json_path, out, trace_summary(problem, trace));
  switch (trace.status) {
    case RunStatus::kConverged:
      return 0;
    case RunStatus::kMaxOuter:
      return 2;
    case RunStatus::kFailed:
      return 1;
  }
  return 1;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto problem = load(o);
  if (!problem.reference) throw InputError("reference required");
  const auto [x0, lam0] = start_point(problem, o);
  const auto cfg = make_config(o, schedule_kind_from_string(o.schedule), 2.0);
  json result;
  result["problem"] = problem.name;
  result["schedule"] = o.schedule;
  out << std::left << std::setw(8) << "method" << std::setw(12) << "status" << std::setw(8)
      << "iters" << std::setw(26) << "q_max_tail" << std::setw(14) << "superlinear"
      << "final_dist_pd\n";
  bool ok = true;
  for (const char* method : {"palm", "alm"}) {
    const Trace trace = std::string(method) == "alm" ? run_alm(problem, x0, lam0, cfg)
                                                     : run_palm(problem, x0, lam0, cfg);
    json entry = trace_summary(problem, trace);
    const auto rates = try_rates(trace);
    out << std::setw(8) << method << std::setw(12) << to_string(trace.status)
        << std::setw(8) << trace.records.size() - 1 << std::setw(26)
        << (rates ? format_number(rates->q_max_tail) : std::string("-")) << std::setw(14)
        << (rates ? (rates->superlinear_flag ? "yes" : "no") : "-")
        << format_number(*trace.last().dist_pd) << '\n';
    ok = ok && trace.status == RunStatus::kConverged;
    result[method] = std::move(entry);
  }
  emit_json(o.json_path, out, result);
  return ok ? 0 : 1;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto problem = load(o);
  if (!problem.reference) throw InputError("reference required");
  if (!problem.reference->sosc_holds) throw InputError("reference must assert SOSC");
  if (o.samples < 1) throw InputError("--samples must be positive");
  if (!(o.radius > 0.0)) throw InputError("--radius must be positive");
  const std::uint64_t seed = resolve_seed(o);
  const std::vector<double> c_list{o.c, 10.0 * o.c};
  std::vector<PropertyReport> reports{
      check_residual_upper_bound(problem, o.radius, o.samples, seed),
      check_quadratic_growth(problem, c_list, o.radius, o.samples, 0.0, seed),
      check_error_bound(problem, o.radius, o.samples, seed),
      check_subproblem_calmness(problem, c_list, o.radius, o.samples, seed),
      check_step_error_bound(problem, c_list, o.radius, o.samples, seed),
  };
  json result;
  result["problem"] = problem.name;
  result["seed"] = seed;
  result["samples"] = o.samples;
  result["radius"] = o.radius;
  result["reports"] = json::array();
  bool all = true;
  for (const auto& r : reports) {
    result["reports"].push_back(to_json(r));
    all = all && r.passed;
  }
  result["passed"] = all;
  emit_json(o.json_path, out, result);
  return all ? 0 : 1;
}

int cmd_rates(const Options& o, std::ostream& out) {
  const auto problem = load(o);
  if (!problem.reference) throw InputError("reference required");
  const auto [x0, lam0] = start_point(problem, o);
  json result;
  result["problem"] = problem.name;
  bool ok = true;
  for (const auto kind : {ScheduleKind::kConstant, ScheduleKind::kUnbounded}) {
    const auto cfg = make_config(o, kind, 4.0);
    const Trace trace = run_palm(problem, x0, lam0, cfg);
    json entry = trace_summary(problem, trace);
    const auto rates = try_rates(trace);
    bool holds = trace.status == RunStatus::kConverged && rates.has_value();
    if (holds) {
      holds = kind == ScheduleKind::kConstant ? rates->q_max_tail < 1.0
                                              : rates->superlinear_flag;
    }
    entry["expected"] = kind == ScheduleKind::kConstant ? "q_linear" : "q_superlinear";
    entry["holds"] = holds;
    ok = ok && holds;
    result[std::string(to_string(kind))] = std::move(entry);
  }
  result["passed"] = ok;
  emit_json(o.json_path, out, result);
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inexact proximal augmented Lagrangian solver for conic programs",
               "conic-palm"};
  app.require_subcommand(1);
  Options o;
  auto* solve = app.add_subcommand("solve", "Run PALM (or ALM) and write the trace");
  auto* compare = app.add_subcommand("compare", "PALM versus ALM rate table");
  auto* verify = app.add_subcommand("verify", "Sampled checks of the local theory");
  auto* rates = app.add_subcommand("rates", "Q-linear and Q-superlinear rate checks");
  auto* list = app.add_subcommand("list", "List registered benchmark problems");
  add_common(*solve, o, true);
  add_common(*compare, o, true);
  add_common(*verify, o, false);
  add_common(*rates, o, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (list->parsed()) return cmd_list(out);
    if (solve->parsed()) return cmd_solve(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (rates->parsed()) return cmd_rates(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace conic_palm
