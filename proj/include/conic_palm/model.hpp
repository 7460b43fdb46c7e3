#pragma once

#include "conic_palm/cones.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace conic_palm {

/// Lambda(x_bar) = {lambda}.
struct Singleton {
  Vector lambda;
};

/// Lambda(x_bar) = [a, b].
struct Segment {
  Vector a;
  Vector b;
};

/// Lambda(x_bar) = {anchor + basis * t : lower <= t <= upper}.
struct AffineBox {
  Vector anchor;
  Matrix basis;
  Vector lower;
  Vector upper;
};

using MultiplierSetDesc = std::variant<Singleton, Segment, AffineBox>;

/// Throws InputError if the description violates its invariants.
void validate(const MultiplierSetDesc& desc);
int dimension(const MultiplierSetDesc& desc);

struct ReferenceSolution {
  Vector x_bar;
  MultiplierSetDesc multiplier_set;
  Vector lambda_bar;
  // Established when the benchmark was designed, not computed.
  bool sosc_holds = true;
};

/// f(x) = 0.5 x'Qx + q'x + r0.
struct QuadraticFunction {
  Matrix Q;
  Vector q;
  double r0 = 0.0;
};

/// Constraint map of one cone block: either A x + b or one quadratic per row.
struct AffineMap {
  Matrix A;
  Vector b;
};
struct QuadraticRows {
  std::vector<QuadraticFunction> rows;
};
struct ConstraintBlock {
  std::variant<AffineMap, QuadraticRows> map;
  PrimitiveCone cone;
};

/// The serializable data of a quadratic instance.
struct QuadraticProblemData {
  int n = 0;
  QuadraticFunction objective;
  std::vector<ConstraintBlock> constraints;
};

/// min f(x) s.t. g(x) in K, with f and g twice differentiable.
struct ProblemInstance {
  std::string name;
  int n = 0;
  int m = 0;
  ConeSpec cone;

  std::function<double(const Vector&)> f_value;
  std::function<Vector(const Vector&)> f_grad;
  std::function<Matrix(const Vector&)> f_hess;
  std::function<Vector(const Vector&)> g_value;
  /// m x n Jacobian.
  std::function<Matrix(const Vector&)> g_jac;
  /// sum_i lam_i * Hessian(g_i)(x), n x n.
  std::function<Matrix(const Vector&, const Vector&)> g_hess_contract;

  std::optional<ReferenceSolution> reference;
  /// Starting point used by the CLI when none is given.
  std::optional<Vector> default_x0;
  std::optional<Vector> default_lam0;
  /// Present when the instance is quadratic and can be written back to JSON.
  std::optional<QuadraticProblemData> quadratic;
};

/// Builds evaluators for a quadratic instance.
ProblemInstance make_quadratic_problem(std::string name,
                                       QuadraticProblemData data);

/// Registered benchmark names, in registry order.
std::vector<std::string> registry_names();

/// Returns a benchmark with its reference validated. Throws LookupError for an
/// unknown name and RegistryIntegrityError if validation fails.
ProblemInstance registry_get(const std::string& name);

/// Throws RegistryIntegrityError unless the reference is a KKT point and every
/// sampled multiplier in the set satisfies the KKT system.
void validate_reference(const ProblemInstance& problem);

struct DerivativeReport {
  double f_grad = 0.0;
  double f_hess = 0.0;
  double g_jac = 0.0;
  double g_hess_contract = 0.0;

  double max() const;
};

/// Central finite differences (step 1e-6) against the analytic evaluators.
/// The seed draws the multiplier used for g_hess_contract.
DerivativeReport check_derivatives(const ProblemInstance& problem,
                                   const Vector& x, std::uint64_t seed);

/// Samples `count` multipliers from the set, deterministically.
std::vector<Vector> sample_multipliers(const MultiplierSetDesc& desc,
                                       int count, std::uint64_t seed);

}  // namespace conic_palm
