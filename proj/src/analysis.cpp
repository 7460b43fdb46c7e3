#include "conic_palm/analysis.hpp"

#include "conic_palm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace conic_palm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGrowthStability = 0.3;
constexpr double kErrorBoundStability = 0.3;
constexpr double kUpperBoundStability = 0.2;
constexpr double kUniformStability = 0.3;
constexpr double kMaxFailureFraction = 0.05;
constexpr double kInnerTol = 1e-12;

const ReferenceSolution& require_reference(const ProblemInstance& problem) {
  if (!problem.reference) throw InputError("reference required");
  return *problem.reference;
}

void require_samples(int n_samples) {
  if (n_samples < 1) throw InputError("sample count must be positive");
}

// (max - min) / min over the fitted values.
double relative_spread(const std::vector<FittedConstant>& fits) {
  if (fits.empty()) return 0.0;
  double lo = kInf;
  double hi = -kInf;
  for (const auto& f : fits) {
    lo = std::min(lo, f.value);
    hi = std::max(hi, f.value);
  }
  if (!std::isfinite(hi) || !(lo > 0.0)) return kInf;
  return (hi - lo) / lo;
}

// How far constants fitted at larger penalties exceed the one at the smallest
// penalty: the bound must hold uniformly for c >= c_bar.
double uniform_growth(const std::vector<FittedConstant>& fits) {
  if (fits.empty()) return 0.0;
  const auto base = std::min_element(fits.begin(), fits.end(), [](const auto& a, const auto& b) {
    return a.parameter < b.parameter;
  });
  if (!std::isfinite(base->value)) return kInf;
  double worst = 0.0;
  for (const auto& f : fits) {
    if (!std::isfinite(f.value)) return kInf;
    if (base->value > 0.0) worst = std::max(worst, f.value / base->value - 1.0);
  }
  return worst;
}

void summarize_margins(PropertyReport& rep, const std::vector<double>& margins) {
  if (margins.empty()) return;
  rep.min_margin = *std::min_element(margins.begin(), margins.end());
  rep.mean_margin = std::accumulate(margins.begin(), margins.end(), 0.0) /
                    static_cast<double>(margins.size());
}

// A multiplier in Lambda(x_bar) within `radius` of lam_bar, by rejection.
Vector sample_multiplier_near(const ReferenceSolution& ref, double radius,
                              std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vector lam = sample_multipliers(ref.multiplier_set, 1, rng()).front();
    if ((lam - ref.lambda_bar).norm() <= radius) return lam;
  }
  return ref.lambda_bar;
}

struct PrimalDualSample {
  Vector x;
  Vector lam;
};

std::vector<PrimalDualSample> sample_pairs(const ProblemInstance& problem, double radius,
                                           int count, std::uint64_t seed) {
  const auto& ref = require_reference(problem);
  std::mt19937_64 rng(seed);
  Vector center(problem.n + problem.m);
  center << ref.x_bar, ref.lambda_bar;
  std::vector<PrimalDualSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Vector z = sample_ball(center, radius, rng);
    out.push_back({z.head(problem.n), z.tail(problem.m)});
  }
  return out;
}

double solution_distance(const ProblemInstance& problem, const Vector& x, const Vector& lam) {
  return dist_pd(x, lam, problem.reference);
}

}  // namespace

RateReport estimate_rates(const std::vector<double>& dist, double floor) {
  // A ratio d(k+1)/d(k) is kept while its denominator is above the floor.
  std::vector<double> used;
  RateReport rep;
  for (std::size_t k = 0; k < dist.size() && dist[k] > floor; ++k) {
    used.push_back(dist[k]);
    if (k + 1 < dist.size()) rep.q_factors.push_back(dist[k + 1] / dist[k]);
  }
  if (rep.q_factors.size() < 2) {
    throw InputError("rate estimate needs at least 2 ratios with a distance above the noise floor, got " +
                     std::to_string(rep.q_factors.size()));
  }
  rep.points_used = static_cast<int>(used.size());
  const std::size_t nq = rep.q_factors.size();
  const std::size_t tail_start = std::min<std::size_t>(3, nq - 1);
  rep.q_max_tail = *std::max_element(rep.q_factors.begin() + static_cast<std::ptrdiff_t>(tail_start),
                                     rep.q_factors.end());
  rep.superlinear_flag = rep.q_factors[nq - 1] < rep.q_factors[nq - 2] &&
                         rep.q_factors[nq - 1] <= 0.1;

  const double n = static_cast<double>(used.size());
  double mean_k = 0.0;
  double mean_y = 0.0;
  for (std::size_t k = 0; k < used.size(); ++k) {
    mean_k += static_cast<double>(k);
    mean_y += std::log(used[k]);
  }
  mean_k /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < used.size(); ++k) {
    const double dk = static_cast<double>(k) - mean_k;
    const double dy = std::log(used[k]) - mean_y;
    sxy += dk * dy;
    sxx += dk * dk;
    syy += dy * dy;
  }
  rep.fit_r2 = syy <= 1e-300 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return rep;
}

RateReport estimate_rates(const Trace& trace) {
  std::vector<double> dist;
  dist.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    if (!rec.dist_pd) throw InputError("reference required");
    dist.push_back(*rec.dist_pd);
  }
  return estimate_rates(dist, 10.0 * trace.stop_tol);
}

PropertyReport check_quadratic_growth(const ProblemInstance& problem,
                                      const std::vector<double>& c_list, double radius,
                                      int n_samples, double kappa, std::uint64_t seed) {
  const auto& ref = require_reference(problem);
  require_samples(n_samples);
  if (c_list.empty()) throw InputError("c_list must not be empty");
  PropertyReport rep;
  rep.property = "quadratic_growth";
  rep.constant_name = "kappa";
  rep.samples = n_samples;
  if (!ref.sosc_holds) rep.note = "reference does not assert SOSC; ";

  std::mt19937_64 rng(seed);
  std::vector<Vector> xs;
  std::vector<Vector> lams;
  for (int i = 0; i < n_samples; ++i) {
    xs.push_back(sample_ball(ref.x_bar, radius, rng));
    lams.push_back(sample_multiplier_near(ref, radius, rng));
  }

  std::vector<double> margins;
  for (double c : c_list) {
    // gap_i >= kappa/2 d_i^2 - tol_i, for each sample.
    std::vector<double> gaps;
    std::vector<double> half_d2;
    std::vector<double> tols;
    for (int i = 0; i < n_samples; ++i) {
      const double base = aug_lagrangian(problem, ref.x_bar, lams[i], c).value;
      const double val = aug_lagrangian(problem, xs[i], lams[i], c).value;
      gaps.push_back(val - base);
      half_d2.push_back(0.5 * (xs[i] - ref.x_bar).squaredNorm());
      tols.push_back(1e-12 * std::max(1.0, std::abs(base)));
    }
    const auto holds = [&](double k) {
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (gaps[i] < k * half_d2[i] - tols[i]) return false;
      }
      return true;
    };
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const double margin = gaps[i] - kappa * half_d2[i];
      margins.push_back(margin);
      if (margin < -tols[i]) ++rep.violations;
    }
    double lo = 0.0;
    double hi = 1.0;
    if (!holds(0.0)) {
      lo = hi = 0.0;
    } else {
      while (holds(hi) && hi < 1e12) {
        lo = hi;
        hi *= 2.0;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
      }
    }
    rep.by_parameter.push_back({c, lo});
  }
  rep.informative = n_samples;
  rep.fitted = kInf;
  for (const auto& f : rep.by_parameter) rep.fitted = std::min(rep.fitted, f.value);
  rep.spread = relative_spread(rep.by_parameter);
  summarize_margins(rep, margins);
  rep.passed = rep.violations == 0 && rep.fitted > 0.0 && rep.spread <= kGrowthStability;
  rep.note += "c_bar candidate " + std::to_string(*std::min_element(c_list.begin(), c_list.end()));
  return rep;
}

PropertyReport error_bound_from_samples(const ProblemInstance& problem,
                                        const std::vector<Vector>& xs,
                                        const std::vector<Vector>& lams) {
  require_reference(problem);
  if (xs.size() != lams.size()) throw InputError("sample lists differ in length");
  PropertyReport rep;
  rep.property = "error_bound";
  rep.constant_name = "tau";
  rep.samples = static_cast<int>(xs.size());
  double tau = 0.0;
  std::vector<double> ratios;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = kkt_residual(problem, xs[i], lams[i]);
    const double d = solution_distance(problem, xs[i], lams[i]);
    if (r == 0.0) {
      if (d > 0.0) ++rep.violations;
      continue;
    }
    ++rep.informative;
    ratios.push_back(d / r);
    tau = std::max(tau, d / r);
  }
  rep.fitted = tau;
  rep.by_parameter.push_back({static_cast<double>(xs.size()), tau});
  for (double& q : ratios) q = tau - q;
  summarize_margins(rep, ratios);
  if (rep.informative == 0) rep.note = "zero informative samples (all at KKT points)";
  rep.passed = rep.informative > 0 && rep.violations == 0 && std::isfinite(tau);
  return rep;
}

PropertyReport check_error_bound(const ProblemInstance& problem, double radius,
                                 int n_samples, std::uint64_t seed) {
  require_samples(n_samples);
  const auto pairs = sample_pairs(problem, radius, 2 * n_samples, seed);
  std::vector<Vector> xs;
  std::vector<Vector> lams;
  for (const auto& p : pairs) {
    xs.push_back(p.x);
    lams.push_back(p.lam);
  }
  const auto half = error_bound_from_samples(
      problem, std::vector<Vector>(xs.begin(), xs.begin() + n_samples),
      std::vector<Vector>(lams.begin(), lams.begin() + n_samples));
  PropertyReport rep = error_bound_from_samples(problem, xs, lams);
  rep.by_parameter.insert(rep.by_parameter.begin(), half.by_parameter.front());
  rep.spread = relative_spread(rep.by_parameter);
  rep.passed = rep.passed && half.passed && rep.spread <= kErrorBoundStability;
  return rep;
}

PropertyReport check_residual_upper_bound(const ProblemInstance& problem, double radius,
                                          int n_samples, std::uint64_t seed) {
  require_samples(n_samples);
  const auto pairs = sample_pairs(problem, radius, 2 * n_samples, seed);
  PropertyReport rep;
  rep.property = "residual_upper_bound";
  rep.constant_name = "kappa_hat";
  rep.samples = 2 * n_samples;
  double fit_n = 0.0;
  double fit_2n = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = solution_distance(problem, pairs[i].x, pairs[i].lam);
    const double r = kkt_residual(problem, pairs[i].x, pairs[i].lam);
    if (d == 0.0) {
      if (r > 0.0) ++rep.violations;
      continue;
    }
    ++rep.informative;
    fit_2n = std::max(fit_2n, r / d);
    if (i < static_cast<std::size_t>(n_samples)) fit_n = fit_2n;
  }
  rep.by_parameter = {{static_cast<double>(n_samples), fit_n},
                      {static_cast<double>(2 * n_samples), fit_2n}};
  rep.fitted = fit_2n;
  rep.spread = relative_spread(rep.by_parameter);
  rep.passed = rep.violations == 0 && rep.informative > 0 && std::isfinite(fit_2n) &&
               rep.spread <= kUpperBoundStability;
  return rep;
}

PropertyReport check_step_error_bound(const ProblemInstance& problem,
                                      const std::vector<double>& c_list, double radius,
                                      int n_samples, std::uint64_t seed) {
  require_reference(problem);
  require_samples(n_samples);
  if (c_list.empty()) throw InputError("c_list must not be empty");
  PropertyReport rep;
  rep.property = "step_error_bound";
  rep.constant_name = "alpha";
  rep.samples = n_samples;
  const auto pairs = sample_pairs(problem, radius, n_samples, seed);
  std::vector<double> margins;
  int attempts = 0;
  for (double c : c_list) {
    double alpha = 0.0;
    for (const auto& s : pairs) {
      const double r = kkt_residual(problem, s.x, s.lam);
      if (r == 0.0) continue;
      ++attempts;
      const auto sol = solve_subproblem(problem, s.lam, c, s.x, kInnerTol, s.x);
      if (sol.status != SubproblemStatus::kConverged) {
        ++rep.failures;
        continue;
      }
      const Vector lam_u = multiplier_update(problem, sol.x, s.lam, c);
      const double lhs = (sol.x - s.x).norm() + (lam_u - s.lam).norm();
      if (!std::isfinite(lhs)) {
        ++rep.violations;
        continue;
      }
      alpha = std::max(alpha, lhs / r);
      margins.push_back(lhs / r);
    }
    rep.by_parameter.push_back({c, alpha});
  }
  rep.informative = attempts - rep.failures;
  rep.fitted = 0.0;
  for (const auto& f : rep.by_parameter) rep.fitted = std::max(rep.fitted, f.value);
  for (double& m : margins) m = rep.fitted - m;
  summarize_margins(rep, margins);
  rep.spread = uniform_growth(rep.by_parameter);
  const bool few_failures =
      attempts > 0 && rep.failures <= kMaxFailureFraction * static_cast<double>(attempts);
  if (!few_failures) rep.note = "too many subproblem failures";
  rep.passed = few_failures && rep.violations == 0 && rep.informative > 0 &&
               std::isfinite(rep.fitted) && rep.spread <= kUniformStability;
  return rep;
}

PropertyReport check_subproblem_calmness(const ProblemInstance& problem,
                                         const std::vector<double>& c_list, double radius,
                                         int n_samples, std::uint64_t seed) {
  const auto& ref = require_reference(problem);
  require_samples(n_samples);
  if (c_list.empty()) throw InputError("c_list must not be empty");
  PropertyReport rep;
  rep.property = "subproblem_isolated_calmness";
  rep.constant_name = "l_hat";
  rep.samples = n_samples;
  // A ball of radius/sqrt(2) in the product space keeps the sum of the two
  // norms within radius.
  const auto pairs = sample_pairs(problem, radius / std::sqrt(2.0), n_samples, seed);
  std::vector<double> margins;
  int attempts = 0;
  for (double c : c_list) {
    double l_hat = 0.0;
    for (const auto& s : pairs) {
      const double pert = (s.lam - ref.lambda_bar).norm() + (s.x - ref.x_bar).norm();
      if (pert == 0.0) continue;
      ++attempts;
      // s.x plays the role of the proximal center v.
      const auto sol = solve_subproblem(problem, s.lam, c, s.x, kInnerTol, s.x);
      if (sol.status != SubproblemStatus::kConverged) {
        ++rep.failures;
        continue;
      }
      const double ratio = (sol.x - ref.x_bar).norm() / pert;
      l_hat = std::max(l_hat, ratio);
      margins.push_back(ratio);
    }
    rep.by_parameter.push_back({c, l_hat});
  }
  rep.informative = attempts - rep.failures;
  rep.fitted = 0.0;
  for (const auto& f : rep.by_parameter) rep.fitted = std::max(rep.fitted, f.value);
  for (double& m : margins) m = rep.fitted - m;
  summarize_margins(rep, margins);
  rep.spread = uniform_growth(rep.by_parameter);
  const bool few_failures =
      attempts > 0 && rep.failures <= kMaxFailureFraction * static_cast<double>(attempts);
  if (!few_failures) rep.note = "too many subproblem failures";
  rep.passed = few_failures && rep.violations == 0 && rep.informative > 0 &&
               std::isfinite(rep.fitted) && rep.spread <= kUniformStability;
  return rep;
}

nlohmann::json to_json(const RateReport& report) {
  return nlohmann::json{{"q_factors", report.q_factors},
                        {"q_max_tail", report.q_max_tail},
                        {"superlinear_flag", report.superlinear_flag},
                        {"fit_r2", report.fit_r2},
                        {"points_used", report.points_used}};
}

nlohmann::json to_json(const PropertyReport& report) {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : report.by_parameter) {
    fits.push_back({{"parameter", f.parameter}, {"value", f.value}});
  }
  return nlohmann::json{{"property", report.property},
                        {"constant", report.constant_name},
                        {"samples", report.samples},
                        {"informative", report.informative},
                        {"violations", report.violations},
                        {"failures", report.failures},
                        {"fitted", report.fitted},
                        {"by_parameter", fits},
                        {"spread", report.spread},
                        {"min_margin", report.min_margin},
                        {"mean_margin", report.mean_margin},
                        {"passed", report.passed},
                        {"note", report.note}};
}

}  // namespace conic_palm
