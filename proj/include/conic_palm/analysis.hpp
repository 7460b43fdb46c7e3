#pragma once

#include "conic_palm/distances.hpp"
#include "conic_palm/drivers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace conic_palm {

struct RateReport {
  /// dist_pd(k+1) / dist_pd(k) for every k whose dist_pd(k) is above the
  /// noise floor, up to the first value at or below it.
  std::vector<double> q_factors;
  /// max q_k for k >= 3 (or over the last ratio when fewer are available).
  double q_max_tail = 0.0;
  /// The ratios end in a strictly decreasing run of length >= 2 whose last
  /// value is <= 0.1.
  bool superlinear_flag = false;
  /// R^2 of a least-squares line through log dist_pd versus k.
  double fit_r2 = 0.0;
  /// Distances above the floor; these also enter the log-linear fit.
  int points_used = 0;
};

/// Rates from a sequence of distances. Throws InputError when fewer than 2
/// ratios have a denominator above `floor`.
RateReport estimate_rates(const std::vector<double>& dist, double floor);

/// Uses dist_pd of each record and 10 * trace.stop_tol as the floor.
RateReport estimate_rates(const Trace& trace);

/// Fitted constant for one penalty value (or for one sample size).
struct FittedConstant {
  double parameter = 0.0;
  double value = 0.0;
};

struct PropertyReport {
  std::string property;
  std::string constant_name;
  int samples = 0;
  /// Samples that entered the fit (e.g. those with r > 0).
  int informative = 0;
  int violations = 0;
  int failures = 0;
  /// Worst-case fitted constant across the per-parameter fits.
  double fitted = 0.0;
  std::vector<FittedConstant> by_parameter;
  /// (max - min) / max over by_parameter, or the one-sided growth for
  /// constants that only need a uniform bound.
  double spread = 0.0;
  double min_margin = 0.0;
  double mean_margin = 0.0;
  bool passed = false;
  std::string note;
};

/// L(x, lam, c) >= L(x_bar, lam, c) + kappa/2 ||x - x_bar||^2 for sampled
/// x in B_radius(x_bar), lam in Lambda(x_bar) near lam_bar, c in c_list.
/// Also fits the largest kappa that holds on all samples, per c.
PropertyReport check_quadratic_growth(const ProblemInstance& problem,
                                      const std::vector<double>& c_list,
                                      double radius, int n_samples, double kappa,
                                      std::uint64_t seed);

/// ||x - x_bar|| + dist(lam, Lambda) <= tau r(x, lam), fitted on n and 2n
/// samples of B_radius(x_bar, lam_bar).
PropertyReport check_error_bound(const ProblemInstance& problem, double radius,
                                 int n_samples, std::uint64_t seed);

/// The error-bound fit on explicit sample pairs.
PropertyReport error_bound_from_samples(const ProblemInstance& problem,
                                        const std::vector<Vector>& xs,
                                        const std::vector<Vector>& lams);

/// r(x, lam) <= kappa_hat (||x - x_bar|| + dist(lam, Lambda)) on B_radius,
/// fitted on n and 2n samples; stable within 20%.
PropertyReport check_residual_upper_bound(const ProblemInstance& problem,
                                          double radius, int n_samples,
                                          std::uint64_t seed);

/// ||u - x|| + ||lam_u - lam|| <= alpha r(x, lam) where u solves the
/// proximal subproblem at (lam, x) and lam_u is the multiplier update at u.
PropertyReport check_step_error_bound(const ProblemInstance& problem,
                                      const std::vector<double>& c_list,
                                      double radius, int n_samples,
                                      std::uint64_t seed);

/// ||x_sol(lam, v) - x_bar|| <= l_hat (||lam - lam_bar|| + ||v - x_bar||) for
/// the proximal subproblem solution with center v.
PropertyReport check_subproblem_calmness(const ProblemInstance& problem,
                                         const std::vector<double>& c_list,
                                         double radius, int n_samples,
                                         std::uint64_t seed);

/// Uniform sample from the Euclidean ball of the given radius.
template <class Rng>
Vector sample_ball(const Vector& center, double radius, Rng& rng);

nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const PropertyReport& report);

}  // namespace conic_palm

#include "conic_palm/detail/sample_ball.hpp"
