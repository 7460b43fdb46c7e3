#pragma once

#include <cmath>
#include <random>

namespace conic_palm {

template <class Rng>
Vector sample_ball(const Vector& center, double radius, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index d = center.size();
  Vector dir(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Eigen::Index i = 0; i < d; ++i) dir(i) = normal(rng);
    norm = dir.norm();
  }
  const double scale = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
  return center + (scale / norm) * dir;
}

}  // namespace conic_palm
