#include "conic_palm/errors.hpp"
#include "conic_palm/subsolver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace conic_palm;
using conic_palm::testing::gaussian;
using conic_palm::testing::scalar_toy;
using conic_palm::testing::vec;

namespace {

/// Dense grid over [-0.5, 0.5]^2 followed by a shrinking pattern search.
Vector grid_minimizer(const Subproblem& sub) {
  double best = std::numeric_limits<double>::infinity();
  Vector arg(2);
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; ++j) {
      const Vector x = vec({0.0025 * i, 0.0025 * j});
      const double v = sub.value(x);
      if (v < best) {
        best = v;
        arg = x;
      }
    }
  }
  for (double step = 0.0025; step > 1e-12; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int d = 0; d < 8; ++d) {
        const double angle = d * M_PI / 4.0;
        const Vector x = arg + step * vec({std::cos(angle), std::sin(angle)});
        const double v = sub.value(x);
        if (v < best) {
          best = v;
          arg = x;
          moved = true;
        }
      }
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("subproblem gradient examples") {
  const auto toy = scalar_toy();
  CHECK(subproblem_grad(toy, vec({0}), vec({0}), 1.0, vec({0})).norm() == 0.0);
  CHECK(subproblem_grad(toy, vec({1}), vec({0}), 1.0, vec({0}))(0) == doctest::Approx(3.0));
}

TEST_CASE("subproblem Hessian examples") {
  const auto toy = scalar_toy();
  CHECK(subproblem_generalized_hessian(toy, vec({0}), vec({0}), 1.0, vec({0}))(0, 0) ==
        doctest::Approx(3.0));

  // g(x) + lam/c strictly inside R_-^2: only f and the prox term remain.
  const auto p1 = registry_get("nlp-degenerate");
  const Matrix h = subproblem_generalized_hessian(p1, vec({0.5, 0}), vec({0.1, 0.1}), 2.0,
                                                  vec({0, 0}));
  Matrix expected = p1.f_hess(vec({0.5, 0}));
  expected += 0.5 * Matrix::Identity(2, 2);
  CHECK((h - expected).norm() < 1e-15);
}

TEST_CASE("subproblem derivatives match finite differences") {
  std::mt19937_64 rng(31);
  const double h = 1e-6;
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    const auto p = registry_get(name);
    for (int i = 0; i < 20; ++i) {
      const Vector x = gaussian(p.n, rng);
      const Vector lam = gaussian(p.m, rng);
      const Vector v = gaussian(p.n, rng);
      const double c = 1.0 + i;
      const Subproblem sub(p, lam, c, v);
      const Vector grad = sub.gradient(x);
      CHECK((grad - subproblem_grad(p, x, lam, c, v)).norm() == 0.0);
      Vector fd(p.n);
      for (int j = 0; j < p.n; ++j) {
        Vector up = x, down = x;
        up(j) += h;
        down(j) -= h;
        fd(j) = (sub.value(up) - sub.value(down)) / (2 * h);
      }
      CHECK((fd - grad).norm() <= 1e-5 * std::max(1.0, grad.norm()));

      const Matrix hess = sub.generalized_hessian(x);
      const Vector d = gaussian(p.n, rng).normalized();
      const Vector dir = (sub.gradient(x + h * d) - sub.gradient(x - h * d)) / (2 * h);
      CHECK((dir - hess * d).norm() <= 1e-4 * std::max(1.0, (hess * d).norm()));
    }
  }
}

TEST_CASE("scalar toy solutions") {
  const auto toy = scalar_toy();
  const auto zero = solve_subproblem(toy, vec({0}), 1.0, vec({0}), 1e-10, vec({5}));
  CHECK(zero.status == SubproblemStatus::kConverged);
  CHECK(std::abs(zero.x(0)) <= 1e-10);

  const auto third = solve_subproblem(toy, vec({1}), 1.0, vec({0}), 1e-10, vec({0}));
  CHECK(third.status == SubproblemStatus::kConverged);
  CHECK(std::abs(third.x(0) + 1.0 / 3.0) <= 1e-9);
  CHECK(third.grad_norm <= 1e-10);

  CHECK_THROWS_AS(solve_subproblem(toy, vec({1}), 1.0, vec({0}), 0.0, vec({0})), InputError);
  CHECK_THROWS_AS(solve_subproblem(toy, vec({1}), -1.0, vec({0}), 1e-8, vec({0})), InputError);
}

TEST_CASE("P1 subproblem matches a brute-force minimizer") {
  const auto p1 = registry_get("nlp-degenerate");
  const Vector lam = vec({0.5, 0.5});
  const Vector v = vec({0.05, 0.05});
  const auto res = solve_subproblem(p1, lam, 10.0, v, 1e-8, v);
  REQUIRE(res.status == SubproblemStatus::kConverged);
  const Vector oracle = grid_minimizer(Subproblem(p1, lam, 10.0, v));
  CHECK((res.x - oracle).norm() <= 1e-6);
}

TEST_CASE("tolerance contract and monotone descent") {
  std::mt19937_64 rng(41);
  int converged = 0;
  for (const auto& name : registry_names()) {
    const auto p = registry_get(name);
    for (int i = 0; i < 40; ++i) {
      const Vector lam = p.reference->lambda_bar + gaussian(p.m, rng, 0.3);
      const Vector v = p.reference->x_bar + gaussian(p.n, rng, 0.3);
      const double c = std::pow(10.0, i % 3);
      const double eps = std::pow(10.0, -4 - i % 6);
      const auto res = solve_subproblem(p, lam, c, v, eps, v);
      if (res.status == SubproblemStatus::kConverged) {
        ++converged;
        CHECK(res.grad_norm <= eps);
        CHECK(Subproblem(p, lam, c, v).gradient(res.x).norm() <= eps);
      }
      for (std::size_t k = 1; k < res.objective_history.size(); ++k) {
        CHECK(res.objective_history[k] <= res.objective_history[k - 1]);
      }
      CHECK(res.objective == res.objective_history.back());
    }
  }
  CHECK(converged >= 190);
}

TEST_CASE("solutions do not depend on the starting point near the reference") {
  std::mt19937_64 rng(43);
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    const auto p = registry_get(name);
    const auto& ref = *p.reference;
    for (int i = 0; i < 10; ++i) {
      const Vector lam = ref.lambda_bar + gaussian(p.m, rng, 0.01);
      const Vector v = ref.x_bar + gaussian(p.n, rng, 0.01);
      const double eps = 1e-10;
      const Vector a = ref.x_bar + gaussian(p.n, rng, 0.05);
      const Vector b = ref.x_bar + gaussian(p.n, rng, 0.05);
      const auto ra = solve_subproblem(p, lam, 10.0, v, eps, a);
      const auto rb = solve_subproblem(p, lam, 10.0, v, eps, b);
      REQUIRE(ra.status == SubproblemStatus::kConverged);
      REQUIRE(rb.status == SubproblemStatus::kConverged);
      CHECK((ra.x - rb.x).norm() <= 10 * eps);
    }
  }
}

TEST_CASE("the reference point solves its own subproblem") {
  for (const auto& name : registry_names()) {
    const auto p = registry_get(name);
    const auto& ref = *p.reference;
    for (double c : {1.0, 10.0}) {
      const auto res = solve_subproblem(p, ref.lambda_bar, c, ref.x_bar, 1e-12, ref.x_bar);
      CHECK(res.status == SubproblemStatus::kConverged);
      CHECK((res.x - ref.x_bar).norm() <= 1e-12);
    }
  }
}

TEST_CASE("iteration cap is reported") {
  const auto p5 = registry_get("nlp-nonconvex");
  SubsolverLimits limits;
  limits.max_iterations = 1;
  const auto res = solve_subproblem(p5, vec({0.3, 0.3}), 10.0, vec({0.4, -0.4}), 1e-14,
                                    vec({0.4, -0.4}), limits);
  CHECK(res.status == SubproblemStatus::kMaxIter);
  CHECK(res.iterations == 1);
}
