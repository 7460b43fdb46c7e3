#include "conic_palm/subsolver.hpp"

#include "conic_palm/errors.hpp"

#include <cmath>
#include <limits>

namespace conic_palm {

std::string_view to_string(SubproblemStatus status) {
  switch (status) {
    case SubproblemStatus::kConverged:
      return "converged";
    case SubproblemStatus::kMaxIter:
      return "max_iter";
    case SubproblemStatus::kLineSearchFail:
      return "line_search_fail";
  }
  return "unknown";
}

Subproblem::Subproblem(const ProblemInstance& problem, Vector lam, double c,
                       std::optional<Vector> prox_center)
    : problem_(&problem), lam_(std::move(lam)), c_(c), v_(std::move(prox_center)) {
  if (!(c_ > 0.0)) throw InputError("penalty parameter must be positive");
  if (lam_.size() != problem.m) throw InputError("multiplier has wrong length");
  if (v_ && v_->size() != problem.n) throw InputError("proximal center has wrong length");
}

double Subproblem::value(const Vector& x) const {
  double v = aug_lagrangian(*problem_, x, lam_, c_).value;
  if (v_) v += 0.5 * (x - *v_).squaredNorm() / c_;
  return v;
}

Vector Subproblem::gradient(const Vector& x) const {
  Vector g = aug_lagrangian(*problem_, x, lam_, c_).grad_x;
  if (v_) g += (x - *v_) / c_;
  return g;
}

Matrix Subproblem::generalized_hessian(const Vector& x) const {
  const auto& p = *problem_;
  const AugLagEval al = aug_lagrangian(p, x, lam_, c_);
  const Vector z = c_ * (al.shifted_point - al.projected_point);
  const Matrix jac = p.g_jac(x);
  const Matrix proj_jac = proj_generalized_jacobian(p.cone, al.shifted_point);
  const Matrix complement = Matrix::Identity(p.m, p.m) - proj_jac;
  Matrix h = p.f_hess(x) + p.g_hess_contract(x, z) +
             c_ * jac.transpose() * complement * jac;
  if (v_) h.diagonal().array() += 1.0 / c_;
  return 0.5 * (h + h.transpose());
}

Vector subproblem_grad(const ProblemInstance& problem, const Vector& x,
                       const Vector& lam, double c, const Vector& v) {
  return Subproblem(problem, lam, c, v).gradient(x);
}

Matrix subproblem_generalized_hessian(const ProblemInstance& problem,
                                      const Vector& x, const Vector& lam,
                                      double c, const Vector& v) {
  return Subproblem(problem, lam, c, v).generalized_hessian(x);
}

double precision_floor(const Subproblem& sub, const Vector& x, double factor) {
  const Matrix h = sub.generalized_hessian(x);
  const double h_inf = h.cwiseAbs().rowwise().sum().maxCoeff();
  const double x_inf = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  const double gf_inf = sub.problem().f_grad(x).cwiseAbs().maxCoeff();
  return factor * std::numeric_limits<double>::epsilon() *
         (h_inf * std::max(1.0, x_inf) + gf_inf);
}

namespace {

// Newton direction from H d = -g, adding mu*I until the factorization is
// positive definite. Returns nullopt if no regularization level works.
std::optional<Vector> newton_direction(const Matrix& h, const Vector& g) {
  const double h_inf = h.cwiseAbs().rowwise().sum().maxCoeff();
  double mu = 0.0;
  const double mu0 = std::max(1e-12, 1e-8 * h_inf);
  for (int attempt = 0; attempt < 24; ++attempt) {
    Matrix reg = h;
    reg.diagonal().array() += mu;
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() == Eigen::Success) {
      // Near-singular factors get regularized as well.
      const auto diag = llt.matrixLLT().diagonal();
      const double ratio = diag.minCoeff() / diag.maxCoeff();
      if (ratio * ratio > 1e-14 || attempt == 23) {
        Vector d = llt.solve(-g);
        if (d.allFinite()) return d;
      }
    }
    mu = mu == 0.0 ? mu0 : 10.0 * mu;
  }
  return std::nullopt;
}

}  // namespace

SubproblemResult minimize(const Subproblem& sub, double eps, const Vector& x_init,
                          const SubsolverLimits& limits) {
  if (!(eps > 0.0)) throw InputError("subproblem tolerance must be positive");
  if (x_init.size() != sub.problem().n) throw InputError("x_init has wrong length");

  SubproblemResult res;
  res.x = x_init;
  res.objective = sub.value(res.x);
  res.objective_history.push_back(res.objective);
  Vector grad = sub.gradient(res.x);
  res.grad_norm = grad.norm();

  for (res.iterations = 0; res.iterations < limits.max_iterations; ++res.iterations) {
    if (res.grad_norm <= eps) {
      res.status = SubproblemStatus::kConverged;
      return res;
    }
    const Matrix h = sub.generalized_hessian(res.x);
    Vector d;
    if (auto nd = newton_direction(h, grad);
        nd && grad.dot(*nd) < -1e-14 * grad.norm() * nd->norm()) {
      d = std::move(*nd);
    } else {
      d = -grad;
    }
    const double slope = grad.dot(d);
    // Objective differences below a few ulps are noise; without this slack
    // the final Newton steps at tight tolerances are rejected.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(res.objective));
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= limits.max_halvings && t >= limits.min_step;
         ++halving, t *= 0.5) {
      const Vector trial = res.x + t * d;
      const double val = sub.value(trial);
      if (std::isfinite(val) && val <= res.objective + limits.armijo * t * slope + noise) {
        res.x = trial;
        res.objective = val;
        res.objective_history.push_back(val);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = SubproblemStatus::kLineSearchFail;
      return res;
    }
    grad = sub.gradient(res.x);
    res.grad_norm = grad.norm();
  }
  res.status = res.grad_norm <= eps ? SubproblemStatus::kConverged
                                    : SubproblemStatus::kMaxIter;
  return res;
}

SubproblemResult solve_subproblem(const ProblemInstance& problem, const Vector& lam,
                                  double c, const Vector& v, double eps,
                                  const Vector& x_init, const SubsolverLimits& limits) {
  return minimize(Subproblem(problem, lam, c, v), eps, x_init, limits);
}

}  // namespace conic_palm
