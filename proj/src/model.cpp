#include "conic_palm/model.hpp"

#include "conic_palm/errors.hpp"
#include "conic_palm/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace conic_palm {

namespace {

constexpr double kReferenceTol = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int block_rows(const ConstraintBlock& block) {
  return std::visit(
      Overloaded{[](const AffineMap& a) { return static_cast<int>(a.A.rows()); },
                 [](const QuadraticRows& q) { return static_cast<int>(q.rows.size()); }},
      block.map);
}

void check_quadratic(const QuadraticFunction& fn, int n, const std::string& where) {
  if (fn.Q.rows() != n || fn.Q.cols() != n) {
    throw InputError(where + ": Q must be " + std::to_string(n) + "x" +
                     std::to_string(n));
  }
  if (fn.q.size() != n) {
    throw InputError(where + ": q must have length " + std::to_string(n));
  }
}

ConeSpec cone_of(const std::vector<ConstraintBlock>& constraints) {
  std::vector<PrimitiveCone> blocks;
  blocks.reserve(constraints.size());
  for (const auto& c : constraints) blocks.push_back(c.cone);
  return ConeSpec(std::move(blocks));
}

// Central-difference Jacobian of a vector map.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn,
                   const Vector& x, double h) {
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    const Vector fp = fn(xp);
    xp(j) = x(j) - h;
    const Vector fm = fn(xp);
    xp(j) = x(j);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

double rel_err(const Matrix& analytic, const Matrix& fd) {
  const double denom = std::max(1.0, fd.cwiseAbs().maxCoeff());
  return (analytic - fd).cwiseAbs().maxCoeff() / denom;
}

Matrix rows_to_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// P1: f = x1 + x2^2, g = (-x1, -x1) in R_-^2. Both constraints are the same
// row, so Lambda(0) is the segment between (1,0) and (0,1).
ProblemInstance make_nlp_degenerate() {
  ProblemInstance p;
  p.name = "nlp-degenerate";
  p.n = 2;
  p.m = 2;
  p.cone = ConeSpec({{ConeKind::kNonpos, 2}});
  p.f_value = [](const Vector& x) { return x(0) + x(1) * x(1); };
  p.f_grad = [](const Vector& x) { return vec({1.0, 2.0 * x(1)}); };
  p.f_hess = [](const Vector&) { return rows_to_matrix({{0.0, 0.0}, {0.0, 2.0}}); };
  p.g_value = [](const Vector& x) { return vec({-x(0), -x(0)}); };
  p.g_jac = [](const Vector&) { return rows_to_matrix({{-1.0, 0.0}, {-1.0, 0.0}}); };
  p.g_hess_contract = [](const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  p.reference = ReferenceSolution{vec({0.0, 0.0}),
                                  Segment{vec({1.0, 0.0}), vec({0.0, 1.0})},
                                  vec({0.5, 0.5}), true};
  p.default_x0 = vec({0.1, 0.1});
  p.default_lam0 = vec({0.3, 0.3});

  QuadraticProblemData data;
  data.n = 2;
  data.objective = {rows_to_matrix({{0.0, 0.0}, {0.0, 2.0}}), vec({1.0, 0.0}), 0.0};
  data.constraints.push_back(
      {AffineMap{rows_to_matrix({{-1.0, 0.0}, {-1.0, 0.0}}), Vector::Zero(2)},
       {ConeKind::kNonpos, 2}});
  p.quadratic = std::move(data);
  return p;
}

// P2: f = 0.5||x||^2, g = A x - b = x1 - 1 in {0}.
ProblemInstance make_eq_quadratic() {
  ProblemInstance p;
  p.name = "eq-quadratic";
  p.n = 2;
  p.m = 1;
  p.cone = ConeSpec({{ConeKind::kZero, 1}});
  p.f_value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  p.f_grad = [](const Vector& x) { return x; };
  p.f_hess = [](const Vector&) { return Matrix::Identity(2, 2).eval(); };
  p.g_value = [](const Vector& x) { return vec({x(0) - 1.0}); };
  p.g_jac = [](const Vector&) { return rows_to_matrix({{1.0, 0.0}}); };
  p.g_hess_contract = [](const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  p.reference = ReferenceSolution{vec({1.0, 0.0}), Singleton{vec({-1.0})},
                                  vec({-1.0}), true};
  p.default_x0 = vec({1.1, 0.0});
  p.default_lam0 = vec({-1.0});

  QuadraticProblemData data;
  data.n = 2;
  data.objective = {Matrix::Identity(2, 2), Vector::Zero(2), 0.0};
  data.constraints.push_back(
      {AffineMap{rows_to_matrix({{1.0, 0.0}}), vec({-1.0})}, {ConeKind::kZero, 1}});
  p.quadratic = std::move(data);
  return p;
}

// P3: f = 0.5||x - (2,0)||^2 s.t. (1, x) in SOC^3, imposed twice. The solution
// x = (1,0) sits on the cone boundary; the single normal direction can be
// split freely between the two copies.
ProblemInstance make_soc_degenerate() {
  ProblemInstance p;
  p.name = "soc-degenerate";
  p.n = 2;
  p.m = 6;
  p.cone = ConeSpec({{ConeKind::kSecondOrder, 3}, {ConeKind::kSecondOrder, 3}});
  p.f_value = [](const Vector& x) {
    return 0.5 * ((x(0) - 2.0) * (x(0) - 2.0) + x(1) * x(1));
  };
  p.f_grad = [](const Vector& x) { return vec({x(0) - 2.0, x(1)}); };
  p.f_hess = [](const Vector&) { return Matrix::Identity(2, 2).eval(); };
  p.g_value = [](const Vector& x) { return vec({1.0, x(0), x(1), 1.0, x(0), x(1)}); };
  p.g_jac = [](const Vector&) {
    return rows_to_matrix({{0, 0}, {1, 0}, {0, 1}, {0, 0}, {1, 0}, {0, 1}});
  };
  p.g_hess_contract = [](const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  const Vector a = vec({-1.0, 1.0, 0.0, 0.0, 0.0, 0.0});
  const Vector b = vec({0.0, 0.0, 0.0, -1.0, 1.0, 0.0});
  p.reference = ReferenceSolution{vec({1.0, 0.0}), Segment{a, b}, 0.5 * (a + b), true};
  p.default_x0 = vec({1.03, 0.02});
  p.default_lam0 = vec({-0.52, 0.51, 0.01, -0.49, 0.5, -0.01});

  QuadraticProblemData data;
  data.n = 2;
  data.objective = {Matrix::Identity(2, 2), vec({-2.0, 0.0}), 2.0};
  const Matrix rows = rows_to_matrix({{0, 0}, {1, 0}, {0, 1}});
  const Vector offset = vec({1.0, 0.0, 0.0});
  data.constraints.push_back({AffineMap{rows, offset}, {ConeKind::kSecondOrder, 3}});
  data.constraints.push_back({AffineMap{rows, offset}, {ConeKind::kSecondOrder, 3}});
  p.quadratic = std::move(data);
  return p;
}

// P4: f = 0.5||x - (2,0)||^2 s.t. [[1+x1, x2], [x2, 1-x1]] PSD, i.e. the unit
// disk. At x = (1,0) the matrix is diag(2, 0).
ProblemInstance make_psd_small() {
  const double r2 = std::sqrt(2.0);
  ProblemInstance p;
  p.name = "psd-small";
  p.n = 2;
  p.m = 3;
  p.cone = ConeSpec({{ConeKind::kPsd, 2}});
  p.f_value = [](const Vector& x) {
    return 0.5 * ((x(0) - 2.0) * (x(0) - 2.0) + x(1) * x(1));
  };
  p.f_grad = [](const Vector& x) { return vec({x(0) - 2.0, x(1)}); };
  p.f_hess = [](const Vector&) { return Matrix::Identity(2, 2).eval(); };
  p.g_value = [r2](const Vector& x) { return vec({1.0 + x(0), r2 * x(1), 1.0 - x(0)}); };
  p.g_jac = [r2](const Vector&) { return rows_to_matrix({{1, 0}, {0, r2}, {-1, 0}}); };
  p.g_hess_contract = [](const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  p.reference = ReferenceSolution{vec({1.0, 0.0}), Singleton{vec({0.0, 0.0, -1.0})},
                                  vec({0.0, 0.0, -1.0}), true};
  p.default_x0 = vec({1.03, 0.02});
  p.default_lam0 = vec({0.01, 0.0, -0.98});

  QuadraticProblemData data;
  data.n = 2;
  data.objective = {Matrix::Identity(2, 2), vec({-2.0, 0.0}), 2.0};
  data.constraints.push_back(
      {AffineMap{rows_to_matrix({{1, 0}, {0, r2}, {-1, 0}}), vec({1.0, 0.0, 1.0})},
       {ConeKind::kPsd, 2}});
  p.quadratic = std::move(data);
  return p;
}

// P5: f = -x1 - x1^2/2 + x2^2/2 (indefinite), g = (x1 + x2^2/2, x2 - x1) in
// R_-^2. The first constraint is strongly active, the second weakly active.
ProblemInstance make_nlp_nonconvex() {
  ProblemInstance p;
  p.name = "nlp-nonconvex";
  p.n = 2;
  p.m = 2;
  p.cone = ConeSpec({{ConeKind::kNonpos, 2}});
  p.f_value = [](const Vector& x) {
    return -x(0) - 0.5 * x(0) * x(0) + 0.5 * x(1) * x(1);
  };
  p.f_grad = [](const Vector& x) { return vec({-1.0 - x(0), x(1)}); };
  p.f_hess = [](const Vector&) { return rows_to_matrix({{-1.0, 0.0}, {0.0, 1.0}}); };
  p.g_value = [](const Vector& x) {
    return vec({x(0) + 0.5 * x(1) * x(1), x(1) - x(0)});
  };
  p.g_jac = [](const Vector& x) { return rows_to_matrix({{1.0, x(1)}, {-1.0, 1.0}}); };
  p.g_hess_contract = [](const Vector&, const Vector& lam) {
    return rows_to_matrix({{0.0, 0.0}, {0.0, lam(0)}});
  };
  p.reference = ReferenceSolution{vec({0.0, 0.0}), Singleton{vec({1.0, 0.0})},
                                  vec({1.0, 0.0}), true};
  p.default_x0 = vec({0.02, -0.03});
  p.default_lam0 = vec({0.97, 0.02});

  QuadraticProblemData data;
  data.n = 2;
  data.objective = {rows_to_matrix({{-1.0, 0.0}, {0.0, 1.0}}), vec({-1.0, 0.0}), 0.0};
  QuadraticRows rows;
  rows.rows.push_back({rows_to_matrix({{0.0, 0.0}, {0.0, 1.0}}), vec({1.0, 0.0}), 0.0});
  rows.rows.push_back({Matrix::Zero(2, 2), vec({-1.0, 1.0}), 0.0});
  data.constraints.push_back({std::move(rows), {ConeKind::kNonpos, 2}});
  p.quadratic = std::move(data);
  return p;
}

}  // namespace

void validate(const MultiplierSetDesc& desc) {
  std::visit(
      Overloaded{
          [](const Singleton&) {},
          [](const Segment& s) {
            if (s.a.size() != s.b.size()) {
              throw InputError("segment endpoints differ in length");
            }
            if ((s.a - s.b).norm() == 0.0) {
              throw InputError("segment endpoints must be distinct");
            }
          },
          [](const AffineBox& box) {
            const auto p = box.basis.cols();
            if (box.basis.rows() != box.anchor.size() || box.lower.size() != p ||
                box.upper.size() != p) {
              throw InputError("affine box: inconsistent dimensions");
            }
            if (Eigen::FullPivLU<Matrix>(box.basis).rank() != p) {
              throw InputError("affine box basis must have full column rank");
            }
            if ((box.lower.array() > box.upper.array()).any()) {
              throw InputError("affine box: lower bound exceeds upper bound");
            }
          }},
      desc);
}

int dimension(const MultiplierSetDesc& desc) {
  return std::visit(
      Overloaded{[](const Singleton& s) { return static_cast<int>(s.lambda.size()); },
                 [](const Segment& s) { return static_cast<int>(s.a.size()); },
                 [](const AffineBox& b) { return static_cast<int>(b.anchor.size()); }},
      desc);
}

std::vector<Vector> sample_multipliers(const MultiplierSetDesc& desc, int count,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    out.push_back(std::visit(
        Overloaded{[](const Singleton& s) -> Vector { return s.lambda; },
                   [&](const Segment& s) -> Vector {
                     const double t = unit(rng);
                     return (1.0 - t) * s.a + t * s.b;
                   },
                   [&](const AffineBox& b) -> Vector {
                     Vector t(b.basis.cols());
                     for (Eigen::Index j = 0; j < t.size(); ++j) {
                       // Unbounded directions are sampled within unit range.
                       const double lo = std::isfinite(b.lower(j)) ? b.lower(j)
                                         : std::isfinite(b.upper(j)) ? b.upper(j) - 1.0
                                                                     : -1.0;
                       const double hi = std::isfinite(b.upper(j)) ? b.upper(j) : lo + 1.0;
                       t(j) = lo + (hi - lo) * unit(rng);
                     }
                     return b.anchor + b.basis * t;
                   }},
        desc));
  }
  return out;
}

ProblemInstance make_quadratic_problem(std::string name, QuadraticProblemData data) {
  const int n = data.n;
  if (n < 1) throw InputError("primal dimension must be >= 1");
  check_quadratic(data.objective, n, "objective");
  int m = 0;
  for (std::size_t i = 0; i < data.constraints.size(); ++i) {
    const auto& block = data.constraints[i];
    const std::string where = "constraint " + std::to_string(i);
    std::visit(Overloaded{[&](const AffineMap& a) {
                            if (a.A.cols() != n || a.A.rows() != a.b.size()) {
                              throw InputError(where + ": A/b dimensions do not match");
                            }
                          },
                          [&](const QuadraticRows& q) {
                            for (const auto& row : q.rows) check_quadratic(row, n, where);
                          }},
               block.map);
    if (block_rows(block) != block.cone.vector_length()) {
      throw InputError(where + ": map has " + std::to_string(block_rows(block)) +
                       " rows but cone block needs " +
                       std::to_string(block.cone.vector_length()));
    }
    m += block_rows(block);
  }

  ProblemInstance p;
  p.name = std::move(name);
  p.n = n;
  p.m = m;
  p.cone = cone_of(data.constraints);

  const auto obj = data.objective;
  p.f_value = [obj](const Vector& x) {
    return 0.5 * x.dot(obj.Q * x) + obj.q.dot(x) + obj.r0;
  };
  p.f_grad = [obj](const Vector& x) -> Vector { return obj.Q * x + obj.q; };
  p.f_hess = [obj](const Vector&) -> Matrix { return obj.Q; };

  const auto blocks = data.constraints;
  p.g_value = [blocks, m](const Vector& x) {
    Vector g(m);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      std::visit(Overloaded{[&](const AffineMap& a) {
                              g.segment(off, a.A.rows()) = a.A * x + a.b;
                              off += a.A.rows();
                            },
                            [&](const QuadraticRows& q) {
                              for (const auto& r : q.rows) {
                                g(off++) = 0.5 * x.dot(r.Q * x) + r.q.dot(x) + r.r0;
                              }
                            }},
                 b.map);
    }
    return g;
  };
  p.g_jac = [blocks, m, n](const Vector& x) {
    Matrix jac(m, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      std::visit(Overloaded{[&](const AffineMap& a) {
                              jac.middleRows(off, a.A.rows()) = a.A;
                              off += a.A.rows();
                            },
                            [&](const QuadraticRows& q) {
                              for (const auto& r : q.rows) {
                                jac.row(off++) = (r.Q * x + r.q).transpose();
                              }
                            }},
                 b.map);
    }
    return jac;
  };
  p.g_hess_contract = [blocks, n](const Vector&, const Vector& lam) {
    Matrix h = Matrix::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      std::visit(Overloaded{[&](const AffineMap& a) { off += a.A.rows(); },
                            [&](const QuadraticRows& q) {
                              for (const auto& r : q.rows) h += lam(off++) * r.Q;
                            }},
                 b.map);
    }
    return h;
  };
  p.quadratic = std::move(data);
  return p;
}

std::vector<std::string> registry_names() {
  return {"nlp-degenerate", "eq-quadratic", "soc-degenerate", "psd-small",
          "nlp-nonconvex"};
}

ProblemInstance registry_get(const std::string& name) {
  ProblemInstance p;
  if (name == "nlp-degenerate") {
    p = make_nlp_degenerate();
  } else if (name == "eq-quadratic") {
    p = make_eq_quadratic();
  } else if (name == "soc-degenerate") {
    p = make_soc_degenerate();
  } else if (name == "psd-small") {
    p = make_psd_small();
  } else if (name == "nlp-nonconvex") {
    p = make_nlp_nonconvex();
  } else {
    throw LookupError("unknown problem '" + name + "'");
  }
  validate_reference(p);
  return p;
}

void validate_reference(const ProblemInstance& problem) {
  if (!problem.reference) return;
  const auto& ref = *problem.reference;
  const auto fail = [&](const std::string& msg) {
    throw RegistryIntegrityError(problem.name + ": " + msg);
  };
  if (ref.x_bar.size() != problem.n) fail("x_bar has wrong length");
  if (ref.lambda_bar.size() != problem.m) fail("lambda_bar has wrong length");
  if (dimension(ref.multiplier_set) != problem.m) fail("multiplier set has wrong dimension");
  try {
    validate(ref.multiplier_set);
  } catch (const InputError& e) {
    fail(e.what());
  }
  const double r_bar = kkt_residual(problem, ref.x_bar, ref.lambda_bar);
  if (!(r_bar <= kReferenceTol)) {
    fail("residual at reference is " + std::to_string(r_bar));
  }
  for (const auto& lam : sample_multipliers(ref.multiplier_set, 100, 0x5eed)) {
    const double r = kkt_residual(problem, ref.x_bar, lam);
    if (!(r <= kReferenceTol)) {
      fail("sampled multiplier violates KKT system, residual " + std::to_string(r));
    }
  }
}

double DerivativeReport::max() const {
  return std::max({f_grad, f_hess, g_jac, g_hess_contract});
}

DerivativeReport check_derivatives(const ProblemInstance& problem, const Vector& x,
                                   std::uint64_t seed) {
  if (x.size() != problem.n) throw InputError("check_derivatives: wrong primal length");
  constexpr double h = 1e-6;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector lam(problem.m);
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = normal(rng);

  DerivativeReport rep;
  const auto f_as_vec = [&](const Vector& y) {
    return Vector::Constant(1, problem.f_value(y));
  };
  rep.f_grad = rel_err(problem.f_grad(x).transpose(), fd_jacobian(f_as_vec, x, h));
  rep.f_hess = rel_err(problem.f_hess(x), fd_jacobian(problem.f_grad, x, h));
  rep.g_jac = rel_err(problem.g_jac(x), fd_jacobian(problem.g_value, x, h));
  const auto jt_lam = [&](const Vector& y) -> Vector {
    return problem.g_jac(y).transpose() * lam;
  };
  rep.g_hess_contract =
      rel_err(problem.g_hess_contract(x, lam), fd_jacobian(jt_lam, x, h));
  return rep;
}

}  // namespace conic_palm
