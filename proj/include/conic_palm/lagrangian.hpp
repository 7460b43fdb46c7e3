#pragma once

#include "conic_palm/model.hpp"

namespace conic_palm {

struct AugLagEval {
  double value = 0.0;
  Vector grad_x;
  /// g(x) - projected_point.
  Vector grad_lambda;
  /// g(x) + lam / c.
  Vector shifted_point;
  /// proj_K(shifted_point).
  Vector projected_point;
};

/// L(x, lam, c) = f(x) + c/2 dist^2(g(x) + lam/c, K) - ||lam||^2 / (2c),
/// with its partial gradients.
AugLagEval aug_lagrangian(const ProblemInstance& problem, const Vector& x,
                          const Vector& lam, double c);

/// grad f(x) + Jg(x)' lam.
Vector lagrangian_grad_x(const ProblemInstance& problem, const Vector& x,
                         const Vector& lam);

/// ||grad_x L(x, lam)|| + ||g(x) - proj_K(g(x) + lam)||.
double kkt_residual(const ProblemInstance& problem, const Vector& x,
                    const Vector& lam);

/// c g(x) + lam - proj_K(c g(x) + lam).
Vector multiplier_update(const ProblemInstance& problem, const Vector& x,
                         const Vector& lam, double c);

void check_dimensions(const ProblemInstance& problem, const Vector& x,
                      const Vector& lam);

}  // namespace conic_palm
