#pragma once

#include "conic_palm/lagrangian.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace conic_palm {

enum class SubproblemStatus { kConverged, kMaxIter, kLineSearchFail };

std::string_view to_string(SubproblemStatus status);

struct SubproblemResult {
  Vector x;
  double grad_norm = 0.0;
  int iterations = 0;
  SubproblemStatus status = SubproblemStatus::kMaxIter;
  double objective = 0.0;
  /// Objective after each accepted step, starting with the initial point.
  std::vector<double> objective_history;
};

struct SubsolverLimits {
  int max_iterations = 200;
  int max_halvings = 60;
  double armijo = 1e-4;
  double min_step = 1e-16;
};

/// Objective x -> L(x, lam, c) + ||x - v||^2 / (2c). Without a proximal
/// center the prox term is dropped, which gives the classical ALM subproblem.
class Subproblem {
 public:
  Subproblem(const ProblemInstance& problem, Vector lam, double c,
             std::optional<Vector> prox_center);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix generalized_hessian(const Vector& x) const;

  const ProblemInstance& problem() const { return *problem_; }
  double penalty() const { return c_; }
  bool proximal() const { return v_.has_value(); }

 private:
  const ProblemInstance* problem_;
  Vector lam_;
  double c_;
  std::optional<Vector> v_;
};

/// grad_x L(x, lam, c) + (x - v) / c.
Vector subproblem_grad(const ProblemInstance& problem, const Vector& x,
                       const Vector& lam, double c, const Vector& v);

/// Hess f + sum_i z_i Hess g_i + c Jg'(I - P)Jg + I/c, where z is the penalty
/// multiplier c(s - proj_K(s)) at s = g(x) + lam/c and P is the generalized
/// Jacobian of the projection at s.
Matrix subproblem_generalized_hessian(const ProblemInstance& problem,
                                      const Vector& x, const Vector& lam,
                                      double c, const Vector& v);

/// Smallest gradient norm the subproblem can resolve near x in double
/// precision: factor * u * (||H||_inf * max(1, ||x||_inf) + ||grad f(x)||_inf),
/// with H the generalized Hessian and u the unit roundoff.
double precision_floor(const Subproblem& sub, const Vector& x, double factor = 10.0);

/// Safeguarded semismooth Newton on a subproblem, stopping when the gradient
/// norm is at most eps.
SubproblemResult minimize(const Subproblem& sub, double eps,
                          const Vector& x_init,
                          const SubsolverLimits& limits = {});

/// Proximal subproblem with center v.
SubproblemResult solve_subproblem(const ProblemInstance& problem,
                                  const Vector& lam, double c, const Vector& v,
                                  double eps, const Vector& x_init,
                                  const SubsolverLimits& limits = {});

}  // namespace conic_palm
