#pragma once

#include "conic_palm/model.hpp"

#include <random>

namespace conic_palm::testing {

/// f = x^2 / 2, g = x, K = {0}.
inline ProblemInstance scalar_toy() {
  QuadraticProblemData data;
  data.n = 1;
  data.objective = {Matrix::Identity(1, 1), Vector::Zero(1), 0.0};
  data.constraints.push_back(
      {AffineMap{Matrix::Identity(1, 1), Vector::Zero(1)}, {ConeKind::kZero, 1}});
  return make_quadratic_problem("scalar-toy", data);
}

inline Vector gaussian(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace conic_palm::testing
