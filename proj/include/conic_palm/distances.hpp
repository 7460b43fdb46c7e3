#pragma once

#include "conic_palm/model.hpp"

namespace conic_palm {

/// dist(lam, Lambda(x_bar)). Box-constrained least squares for AffineBox is
/// solved by projected gradient to 1e-12.
double dist_to_multiplier_set(const Vector& lam, const MultiplierSetDesc& desc);

/// Nearest point of the multiplier set to lam.
Vector nearest_multiplier(const Vector& lam, const MultiplierSetDesc& desc);

/// ||x - x_bar|| + dist(lam, Lambda(x_bar)).
double dist_pd(const Vector& x, const Vector& lam,
               const std::optional<ReferenceSolution>& reference);

}  // namespace conic_palm
