#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace conic_palm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ConeKind { kZero, kNonneg, kNonpos, kSecondOrder, kPsd };

std::string_view to_string(ConeKind kind);
ConeKind cone_kind_from_string(std::string_view name);

/// One factor of a product cone. For kPsd, `dim` is the matrix side n and the
/// block occupies n(n+1)/2 entries of the ambient vector (scaled svec layout).
struct PrimitiveCone {
  ConeKind kind;
  int dim;

  /// Number of entries this block occupies in the ambient vector.
  int vector_length() const;
};

/// K = K_1 x ... x K_p with blocks laid out contiguously in the order given.
class ConeSpec {
 public:
  ConeSpec() = default;
  explicit ConeSpec(std::vector<PrimitiveCone> blocks);

  const std::vector<PrimitiveCone>& blocks() const { return blocks_; }
  int total_dim() const { return total_dim_; }
  /// Start offset of block i in the ambient vector.
  int offset(std::size_t i) const { return offsets_[i]; }

 private:
  std::vector<PrimitiveCone> blocks_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
};

// Scaled symmetric-vector layout: lower triangle, column-major, off-diagonal
// entries multiplied by sqrt(2) so that <svec(A), svec(B)> = tr(AB).
int svec_length(int n);
int svec_side(int length);
Vector svec(const Matrix& sym);
Matrix smat(const Eigen::Ref<const Vector>& v);

/// Euclidean projection onto K.
Vector project(const ConeSpec& cone, const Eigen::Ref<const Vector>& y);

/// ||y - proj_K(y)||^2.
double dist_sq(const ConeSpec& cone, const Eigen::Ref<const Vector>& y);

/// One element of the Clarke generalized Jacobian of proj_K at y, as a dense
/// symmetric matrix with 0 <= P <= I. Ties at kinks resolve deterministically:
/// orthant zeros map to 0, SOC boundary points use the boundary formula.
Matrix proj_generalized_jacobian(const ConeSpec& cone,
                                 const Eigen::Ref<const Vector>& y);

/// ||y - proj_K(y + lam)||. Zero iff y in K and lam in N_K(y).
double normal_cone_gap(const ConeSpec& cone, const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Vector>& lam);

/// Convenience: true when y lies in K up to `tol` in distance.
bool contains(const ConeSpec& cone, const Eigen::Ref<const Vector>& y,
              double tol = 1e-12);

}  // namespace conic_palm
