#include "conic_palm/lagrangian.hpp"

#include "conic_palm/errors.hpp"

namespace conic_palm {

void check_dimensions(const ProblemInstance& problem, const Vector& x,
                      const Vector& lam) {
  if (x.size() != problem.n) {
    throw InputError("primal vector has length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(problem.n));
  }
  if (lam.size() != problem.m) {
    throw InputError("multiplier has length " + std::to_string(lam.size()) +
                     ", expected " + std::to_string(problem.m));
  }
}

AugLagEval aug_lagrangian(const ProblemInstance& problem, const Vector& x,
                          const Vector& lam, double c) {
  check_dimensions(problem, x, lam);
  if (!(c > 0.0)) throw InputError("penalty parameter must be positive");
  AugLagEval out;
  const Vector g = problem.g_value(x);
  out.shifted_point = g + lam / c;
  out.projected_point = project(problem.cone, out.shifted_point);
  const Vector excess = out.shifted_point - out.projected_point;
  out.value = problem.f_value(x) + 0.5 * c * excess.squaredNorm() -
              0.5 * lam.squaredNorm() / c;
  out.grad_x = problem.f_grad(x) + problem.g_jac(x).transpose() * (c * excess);
  out.grad_lambda = g - out.projected_point;
  return out;
}

Vector lagrangian_grad_x(const ProblemInstance& problem, const Vector& x,
                         const Vector& lam) {
  check_dimensions(problem, x, lam);
  return problem.f_grad(x) + problem.g_jac(x).transpose() * lam;
}

double kkt_residual(const ProblemInstance& problem, const Vector& x,
                    const Vector& lam) {
  const Vector g = problem.g_value(x);
  const Vector shifted = g + lam;
  return lagrangian_grad_x(problem, x, lam).norm() +
         (g - project(problem.cone, shifted)).norm();
}

Vector multiplier_update(const ProblemInstance& problem, const Vector& x,
                         const Vector& lam, double c) {
  check_dimensions(problem, x, lam);
  if (!(c > 0.0)) throw InputError("penalty parameter must be positive");
  const Vector w = c * problem.g_value(x) + lam;
  return w - project(problem.cone, w);
}

}  // namespace conic_palm
