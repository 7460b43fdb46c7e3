#include "conic_palm/cones.hpp"

#include "conic_palm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conic_palm {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void check_length(const ConeSpec& cone, Eigen::Index n, const char* what) {
  if (n != cone.total_dim()) {
    throw InputError(std::string(what) + ": vector length " +
                     std::to_string(n) + " does not match cone dimension " +
                     std::to_string(cone.total_dim()));
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw NumericalError("PSD projection: eigendecomposition did not converge");
  }
  return es;
}

void project_soc(Eigen::Ref<Vector> y) {
  const double t = y(0);
  const double nz = y.tail(y.size() - 1).norm();
  if (nz <= t) return;
  if (nz <= -t) {
    y.setZero();
    return;
  }
  const double a = 0.5 * (t + nz);
  y.tail(y.size() - 1) *= a / nz;
  y(0) = a;
}

Matrix soc_jacobian(const Eigen::Ref<const Vector>& y) {
  const Eigen::Index d = y.size();
  const double t = y(0);
  const auto z = y.tail(d - 1);
  const double nz = z.norm();
  if (nz < t) return Matrix::Identity(d, d);
  if (nz < -t || nz == 0.0) return Matrix::Zero(d, d);
  const Vector w = z / nz;
  const double ratio = t / nz;
  Matrix p(d, d);
  p(0, 0) = 1.0;
  p.block(1, 0, d - 1, 1) = w;
  p.block(0, 1, 1, d - 1) = w.transpose();
  p.block(1, 1, d - 1, d - 1) =
      (1.0 + ratio) * Matrix::Identity(d - 1, d - 1) - ratio * w * w.transpose();
  return 0.5 * p;
}

// Loewner divided differences of max(., 0) in the eigenbasis; equal
// eigenvalues take the derivative, which at 0 is resolved to 0.
Matrix psd_jacobian(const Eigen::Ref<const Vector>& y) {
  const int n = svec_side(static_cast<int>(y.size()));
  const auto es = eigen_of(smat(y));
  const Vector& ev = es.eigenvalues();
  const Matrix& q = es.eigenvectors();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  Matrix omega(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = ev(i);
      const double b = ev(j);
      if (std::abs(a - b) <= 1e-14 * scale) {
        omega(i, j) = (a > 0.0 && b > 0.0) ? 1.0 : 0.0;
      } else {
        omega(i, j) = (std::max(a, 0.0) - std::max(b, 0.0)) / (a - b);
      }
    }
  }
  const int len = static_cast<int>(y.size());
  Matrix p(len, len);
  Vector e = Vector::Zero(len);
  for (int k = 0; k < len; ++k) {
    e.setZero();
    e(k) = 1.0;
    const Matrix h = q.transpose() * smat(e) * q;
    p.col(k) = svec(q * omega.cwiseProduct(h) * q.transpose());
  }
  return 0.5 * (p + p.transpose());
}

}  // namespace

std::string_view to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::kZero:
      return "zero";
    case ConeKind::kNonneg:
      return "nonneg";
    case ConeKind::kNonpos:
      return "nonpos";
    case ConeKind::kSecondOrder:
      return "soc";
    case ConeKind::kPsd:
      return "psd";
  }
  return "unknown";
}

ConeKind cone_kind_from_string(std::string_view name) {
  if (name == "zero") return ConeKind::kZero;
  if (name == "nonneg") return ConeKind::kNonneg;
  if (name == "nonpos") return ConeKind::kNonpos;
  if (name == "soc") return ConeKind::kSecondOrder;
  if (name == "psd") return ConeKind::kPsd;
  throw InputError("unknown cone kind '" + std::string(name) + "'");
}

int PrimitiveCone::vector_length() const {
  return kind == ConeKind::kPsd ? svec_length(dim) : dim;
}

ConeSpec::ConeSpec(std::vector<PrimitiveCone> blocks)
    : blocks_(std::move(blocks)) {
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.dim < 1) throw InputError("cone block dimension must be >= 1");
    if (b.kind == ConeKind::kSecondOrder && b.dim < 2) {
      throw InputError("second-order cone block needs dim >= 2");
    }
    offsets_.push_back(total_dim_);
    total_dim_ += b.vector_length();
  }
}

int svec_length(int n) { return n * (n + 1) / 2; }

int svec_side(int length) {
  const int n = static_cast<int>(std::lround((std::sqrt(8.0 * length + 1) - 1) / 2));
  if (svec_length(n) != length) {
    throw InputError("length " + std::to_string(length) +
                     " is not a triangular number");
  }
  return n;
}

Vector svec(const Matrix& sym) {
  const auto n = static_cast<int>(sym.rows());
  Vector v(svec_length(n));
  int k = 0;
  for (int col = 0; col < n; ++col) {
    for (int row = col; row < n; ++row) {
      v(k++) = row == col ? sym(row, col) : kSqrt2 * sym(row, col);
    }
  }
  return v;
}

Matrix smat(const Eigen::Ref<const Vector>& v) {
  const int n = svec_side(static_cast<int>(v.size()));
  Matrix m(n, n);
  int k = 0;
  for (int col = 0; col < n; ++col) {
    for (int row = col; row < n; ++row) {
      if (row == col) {
        m(row, col) = v(k);
      } else {
        m(row, col) = v(k) / kSqrt2;
        m(col, row) = m(row, col);
      }
      ++k;
    }
  }
  return m;
}

Vector project(const ConeSpec& cone, const Eigen::Ref<const Vector>& y) {
  check_length(cone, y.size(), "project");
  Vector out = y;
  for (std::size_t i = 0; i < cone.blocks().size(); ++i) {
    const auto& b = cone.blocks()[i];
    auto seg = out.segment(cone.offset(i), b.vector_length());
    switch (b.kind) {
      case ConeKind::kZero:
        seg.setZero();
        break;
      case ConeKind::kNonneg:
        seg = seg.cwiseMax(0.0);
        break;
      case ConeKind::kNonpos:
        seg = seg.cwiseMin(0.0);
        break;
      case ConeKind::kSecondOrder:
        project_soc(seg);
        break;
      case ConeKind::kPsd: {
        const auto es = eigen_of(smat(seg));
        const Vector clipped = es.eigenvalues().cwiseMax(0.0);
        seg = svec(es.eigenvectors() * clipped.asDiagonal() *
                   es.eigenvectors().transpose());
        break;
      }
    }
  }
  return out;
}

double dist_sq(const ConeSpec& cone, const Eigen::Ref<const Vector>& y) {
  return (y - project(cone, y)).squaredNorm();
}

Matrix proj_generalized_jacobian(const ConeSpec& cone,
                                 const Eigen::Ref<const Vector>& y) {
  check_length(cone, y.size(), "proj_generalized_jacobian");
  const int m = cone.total_dim();
  Matrix p = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < cone.blocks().size(); ++i) {
    const auto& b = cone.blocks()[i];
    const int off = cone.offset(i);
    const int len = b.vector_length();
    const auto seg = y.segment(off, len);
    switch (b.kind) {
      case ConeKind::kZero:
        break;
      case ConeKind::kNonneg:
        for (int j = 0; j < len; ++j) p(off + j, off + j) = seg(j) > 0.0 ? 1.0 : 0.0;
        break;
      case ConeKind::kNonpos:
        for (int j = 0; j < len; ++j) p(off + j, off + j) = seg(j) < 0.0 ? 1.0 : 0.0;
        break;
      case ConeKind::kSecondOrder:
        p.block(off, off, len, len) = soc_jacobian(seg);
        break;
      case ConeKind::kPsd:
        p.block(off, off, len, len) = psd_jacobian(seg);
        break;
    }
  }
  return p;
}

double normal_cone_gap(const ConeSpec& cone, const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Vector>& lam) {
  check_length(cone, y.size(), "normal_cone_gap");
  check_length(cone, lam.size(), "normal_cone_gap");
  const Vector shifted = y + lam;
  return (y - project(cone, shifted)).norm();
}

bool contains(const ConeSpec& cone, const Eigen::Ref<const Vector>& y,
              double tol) {
  return std::sqrt(dist_sq(cone, y)) <= tol;
}

}  // namespace conic_palm
