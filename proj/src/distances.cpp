#include "conic_palm/distances.hpp"

#include "conic_palm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace conic_palm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vector nearest_on_segment(const Vector& lam, const Segment& s) {
  const Vector dir = s.b - s.a;
  const double t = std::clamp((lam - s.a).dot(dir) / dir.squaredNorm(), 0.0, 1.0);
  return s.a + t * dir;
}

// min_t ||anchor + B t - lam||^2 s.t. lower <= t <= upper.
Vector nearest_in_box(const Vector& lam, const AffineBox& box) {
  const Matrix gram = box.basis.transpose() * box.basis;
  const Vector rhs = box.basis.transpose() * (lam - box.anchor);
  // Step 1/L with L the largest eigenvalue of the Gram matrix.
  const double lip = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  const auto clamp_box = [&](const Vector& t) -> Vector {
    return t.cwiseMax(box.lower).cwiseMin(box.upper);
  };
  // Unconstrained solution clamped into the box is a good start.
  Vector t = clamp_box(gram.ldlt().solve(rhs));
  for (int it = 0; it < 100000; ++it) {
    const Vector next = clamp_box(t - (gram * t - rhs) / lip);
    const double move = (next - t).norm();
    t = next;
    if (move <= 1e-12 * std::max(1.0, t.norm())) break;
  }
  return box.anchor + box.basis * t;
}

}  // namespace

Vector nearest_multiplier(const Vector& lam, const MultiplierSetDesc& desc) {
  if (lam.size() != dimension(desc)) {
    throw InputError("multiplier length does not match the multiplier set");
  }
  return std::visit(
      Overloaded{[](const Singleton& s) -> Vector { return s.lambda; },
                 [&](const Segment& s) -> Vector { return nearest_on_segment(lam, s); },
                 [&](const AffineBox& b) -> Vector { return nearest_in_box(lam, b); }},
      desc);
}

double dist_to_multiplier_set(const Vector& lam, const MultiplierSetDesc& desc) {
  return (lam - nearest_multiplier(lam, desc)).norm();
}

double dist_pd(const Vector& x, const Vector& lam,
               const std::optional<ReferenceSolution>& reference) {
  if (!reference) throw InputError("reference required");
  if (x.size() != reference->x_bar.size()) throw InputError("primal vector has wrong length");
  return (x - reference->x_bar).norm() +
         dist_to_multiplier_set(lam, reference->multiplier_set);
}

}  // namespace conic_palm
