#pragma once

// Complex symmetric matrix algebra used throughout the library.
//
// Complex symmetric is *not* Hermitian: A == A^T, with no conjugation. The
// spectrum of such a matrix is complex in general, so every factorization
// here goes through LU with partial pivoting on the complex matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bargmann/errors.hpp"

namespace bargmann {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Smallest eigenvalue of Re(A) accepted as "positive definite".
inline constexpr double kAdmissibilityEps = 1e-10;

/// Relative pivot floor for complex LU: |u_ii| must exceed
/// kSingularityRel * dim * max|a_ij|.
inline constexpr double kSingularityRel = 1e-13;

/// Complex k x k matrix with entries[i][j] == entries[j][i]. Only the upper
/// triangle is stored, so an asymmetric instance cannot be constructed.
class ComplexSymMatrix {
 public:
  explicit ComplexSymMatrix(int dim) : dim_(dim), upper_(packed_size(dim), cplx{0.0, 0.0}) {
    if (dim <= 0) throw DimensionError("ComplexSymMatrix: dimension must be positive");
  }

  /// Reads the upper triangle of a square matrix; the lower triangle is ignored.
  static ComplexSymMatrix from_upper(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("ComplexSymMatrix: matrix is not square");
    ComplexSymMatrix out(static_cast<int>(m.rows()));
    for (int i = 0; i < out.dim_; ++i)
      for (int j = i; j < out.dim_; ++j) out.upper_[out.index(i, j)] = m(i, j);
    return out;
  }

  /// Symmetric part (M + M^T)/2 of a computed result that is symmetric up to
  /// rounding.
  static ComplexSymMatrix symmetrized(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("ComplexSymMatrix: matrix is not square");
    ComplexSymMatrix out(static_cast<int>(m.rows()));
    for (int i = 0; i < out.dim_; ++i)
      for (int j = i; j < out.dim_; ++j) out.upper_[out.index(i, j)] = 0.5 * (m(i, j) + m(j, i));
    return out;
  }

  static ComplexSymMatrix from_parts(const RMatrix& re, const RMatrix& im) {
    if (re.rows() != im.rows() || re.cols() != im.cols())
      throw DimensionError("ComplexSymMatrix: real and imaginary parts differ in shape");
    CMatrix m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return from_upper(m);
  }

  static ComplexSymMatrix identity(int dim, cplx scale = 1.0) {
    ComplexSymMatrix out(dim);
    for (int i = 0; i < dim; ++i) out.upper_[out.index(i, i)] = scale;
    return out;
  }

  int dim() const noexcept { return dim_; }

  cplx operator()(int i, int j) const { return upper_[i <= j ? index(i, j) : index(j, i)]; }

  void set(int i, int j, cplx v) { upper_[i <= j ? index(i, j) : index(j, i)] = v; }

  CMatrix dense() const {
    CMatrix m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }
  RMatrix real() const { return dense().real(); }
  RMatrix imag() const { return dense().imag(); }

  double max_abs_entry() const {
    double m = 0.0;
    for (const auto& v : upper_) m = std::max(m, std::abs(v));
    return m;
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (int i = 0; i < dim_; ++i) {
      os << (i ? "; " : "");
      for (int j = 0; j < dim_; ++j) {
        const cplx v = (*this)(i, j);
        os << (j ? ", " : "") << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << 'i';
      }
    }
    os << ']';
    return os.str();
  }

  friend bool operator==(const ComplexSymMatrix&, const ComplexSymMatrix&) = default;

 private:
  static std::size_t packed_size(int dim) {
    return dim > 0 ? static_cast<std::size_t>(dim) * (dim + 1) / 2 : 0;
  }
  std::size_t index(int i, int j) const {
    // row-major packed upper triangle
    return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
  }

  int dim_;
  std::vector<cplx> upper_;
};

inline double min_real_part_eigenvalue(const ComplexSymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m.real(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// True iff the smallest eigenvalue of Re(M) exceeds kAdmissibilityEps.
inline bool check_admissible(const ComplexSymMatrix& m) {
  return min_real_part_eigenvalue(m) > kAdmissibilityEps;
}

/// Complex symmetric matrix with positive definite real part.
class AdmissibleMatrix {
 public:
  explicit AdmissibleMatrix(ComplexSymMatrix m) : m_(std::move(m)) {
    if (!check_admissible(m_))
      throw DomainError("matrix is not admissible: Re(A) is not positive definite: " + m_.to_string());
  }

  static std::optional<AdmissibleMatrix> make(ComplexSymMatrix m) {
    if (!check_admissible(m)) return std::nullopt;
    return AdmissibleMatrix(std::move(m));
  }

  const ComplexSymMatrix& matrix() const noexcept { return m_; }
  int dim() const noexcept { return m_.dim(); }
  CMatrix dense() const { return m_.dense(); }
  RMatrix real() const { return m_.real(); }
  RMatrix imag() const { return m_.imag(); }
  cplx operator()(int i, int j) const { return m_(i, j); }

  friend bool operator==(const AdmissibleMatrix&, const AdmissibleMatrix&) = default;

 private:
  ComplexSymMatrix m_;
};

/// The 2n x 2n matrix [[0, -I_n], [I_n, 0]]: multiplication by i in the
/// stacked real coordinates [Re z; Im z].
class SymplecticJ {
 public:
  explicit SymplecticJ(int dim) : dim_(dim) {
    if (dim <= 0 || dim % 2 != 0) throw DimensionError("SymplecticJ: dimension must be even and positive");
  }
  int dim() const noexcept { return dim_; }
  int n() const noexcept { return dim_ / 2; }
  RMatrix matrix() const {
    const int n = dim_ / 2;
    RMatrix j = RMatrix::Zero(dim_, dim_);
    j.topRightCorner(n, n) = -RMatrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = RMatrix::Identity(n, n);
    return j;
  }

 private:
  int dim_;
};

/// Element of SO(2).
struct Rotation2 {
  double angle = 0.0;
  Eigen::Matrix2d matrix() const {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix2d u;
    u << c, -s, s, c;
    return u;
  }
};

/// Omega(M) = J^T Re(M) J - Re(M) - Im(M) J - J^T Im(M).
inline RMatrix omega(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw DimensionError("omega: matrix must be square with even dimension");
  const RMatrix j = SymplecticJ(static_cast<int>(m.rows())).matrix();
  const RMatrix re = m.real();
  const RMatrix im = m.imag();
  return j.transpose() * re * j - re - im * j - j.transpose() * im;
}

inline RMatrix omega(const ComplexSymMatrix& m) { return omega(m.dense()); }

/// U^T A U for a 2 x 2 matrix.
inline ComplexSymMatrix conjugate_so2(const ComplexSymMatrix& a, const Rotation2& u) {
  if (a.dim() != 2) throw DimensionError("conjugate_so2: matrix must be 2 x 2");
  const Eigen::Matrix2cd uc = u.matrix().cast<cplx>();
  return ComplexSymMatrix::symmetrized(uc.transpose() * a.dense() * uc);
}

inline AdmissibleMatrix conjugate_so2(const AdmissibleMatrix& a, const Rotation2& u) {
  return AdmissibleMatrix(conjugate_so2(a.matrix(), u));
}

/// Rotation U with U^T S U diagonal. Angles differing by pi/2 all work;
/// this returns the one in [0, pi/2). A multiple of the identity gives 0.
inline Rotation2 diagonalizing_rotation(const Eigen::Matrix2d& s) {
  const double b = 0.5 * (s(0, 1) + s(1, 0));
  const double diff = s(0, 0) - s(1, 1);
  if (b == 0.0 && diff == 0.0) return {0.0};
  // off-diagonal of U^T S U vanishes iff tan(2 theta) = 2b / (a - d)
  double theta = 0.5 * std::atan2(2.0 * b, diff);
  const double quarter = 0.5 * std::numbers::pi;
  theta = std::fmod(theta, quarter);
  if (theta < 0.0) theta += quarter;
  if (theta >= quarter) theta -= quarter;
  return {theta};
}

namespace detail {

struct ComplexLU {
  Eigen::PartialPivLU<CMatrix> lu;
  cplx det;
};

inline ComplexLU checked_lu(const CMatrix& a) {
  const auto k = a.rows();
  ComplexLU out{Eigen::PartialPivLU<CMatrix>(a), cplx{}};
  out.det = out.lu.determinant();
  const double scale = a.cwiseAbs().maxCoeff();
  const double floor = kSingularityRel * static_cast<double>(k) * scale;
  const auto& u = out.lu.matrixLU();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < k; ++i) min_pivot = std::min(min_pivot, std::abs(u(i, i)));
  if (!(scale > 0.0) || !(min_pivot > floor))
    throw SingularityError("matrix is numerically singular", std::abs(out.det));
  return out;
}

}  // namespace detail

inline cplx complex_det(const CMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("complex_det: matrix is not square");
  return Eigen::PartialPivLU<CMatrix>(a).determinant();
}

inline cplx complex_det(const ComplexSymMatrix& a) { return complex_det(a.dense()); }

/// Inverse of a general square complex matrix; throws SingularityError when
/// a pivot falls below the scale-aware floor.
inline CMatrix complex_inverse(const CMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("complex_inverse: matrix is not square");
  return detail::checked_lu(a).lu.inverse();
}

inline ComplexSymMatrix complex_sym_inverse(const ComplexSymMatrix& a) {
  return ComplexSymMatrix::symmetrized(complex_inverse(a.dense()));
}

/// sqrt(det A) on the branch exp(1/2 sum log lambda_i) with principal logs.
/// Every eigenvalue of an admissible matrix has positive real part, so this
/// branch is continuous on the admissible set.
inline cplx principal_sqrt_det(const CMatrix& a) {
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("principal_sqrt_det: eigen solver failed");
  cplx log_sum{0.0, 0.0};
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) log_sum += std::log(es.eigenvalues()(i));
  return std::exp(0.5 * log_sum);
}

inline cplx principal_sqrt_det(const AdmissibleMatrix& a) { return principal_sqrt_det(a.dense()); }

}  // namespace bargmann
