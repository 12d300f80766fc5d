#ifndef GAUSSGEO_MATCORE_HPP
#define GAUSSGEO_MATCORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gaussgeo/errors.hpp"

namespace gaussgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

namespace tolerance {
inline constexpr double eigen = 1e-12;
inline constexpr double sqrt = 1e-12;
inline constexpr double cholesky = 1e-12;
inline constexpr double symmetry = 1e-10;
inline constexpr double determinant = 1e-9;
}  // namespace tolerance

inline Matrix symmetrized(const Matrix & m) { return 0.5 * (m + m.transpose()); }

/// Largest entry of |m - m^T|.
inline double asymmetry(const Matrix & m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

/**
 * Real symmetric matrix. The stored entries are exactly symmetric: every
 * construction path averages the input with its transpose.
 */
class SymMatrix
{
public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix & m)
  {
    if (m.rows() != m.cols()) {
      throw InputError("SymMatrix: matrix is not square");
    }
    m_ = symmetrized(m);
  }

  /// Rejects inputs whose asymmetry exceeds tol relative to the largest entry.
  static SymMatrix checked(const Matrix & m, double tol = 1e-12)
  {
    if (m.rows() != m.cols()) {
      throw InputError("SymMatrix: matrix is not square");
    }
    const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
    if (m.size() && asymmetry(m) > tol * scale) {
      throw InputError("SymMatrix: matrix is not symmetric (asymmetry " + std::to_string(asymmetry(m)) + ")");
    }
    return SymMatrix(m);
  }

  static SymMatrix zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

  Index order() const { return m_.rows(); }
  const Matrix & matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  friend SymMatrix operator+(const SymMatrix & a, const SymMatrix & b) { return SymMatrix(a.m_ + b.m_); }
  friend SymMatrix operator-(const SymMatrix & a, const SymMatrix & b) { return SymMatrix(a.m_ - b.m_); }
  friend SymMatrix operator-(const SymMatrix & a) { return SymMatrix(-a.m_); }
  friend SymMatrix operator*(double s, const SymMatrix & a) { return SymMatrix(s * a.m_); }

private:
  Matrix m_;
};

/// Symmetric positive definite matrix; positivity is checked by a Cholesky factorization.
class SpdMatrix
{
public:
  SpdMatrix() = default;

  explicit SpdMatrix(const SymMatrix & s) : s_(s)
  {
    if (s.order() == 0) {
      throw InputError("SpdMatrix: empty matrix");
    }
    Eigen::LLT<Matrix> llt(s_.matrix());
    if (llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().allFinite()) {
      throw NotPositiveDefinite("SpdMatrix: matrix is not positive definite");
    }
  }

  explicit SpdMatrix(const Matrix & m) : SpdMatrix(SymMatrix(m)) {}

  static SpdMatrix identity(Index n) { return SpdMatrix(SymMatrix::identity(n)); }

  Index order() const { return s_.order(); }
  const Matrix & matrix() const { return s_.matrix(); }
  const SymMatrix & sym() const { return s_; }
  double operator()(Index i, Index j) const { return s_(i, j); }

  double log_det() const
  {
    Eigen::LLT<Matrix> llt(s_.matrix());
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }

  double det() const { return std::exp(log_det()); }

private:
  SymMatrix s_;
};

/// SPD matrix with unit determinant (a point of SL(m)/SO(m)).
class SpecialSpd
{
public:
  static SpecialSpd checked(const SpdMatrix & p, double tol = tolerance::determinant)
  {
    const double d = p.det();
    if (std::abs(d - 1.0) > tol) {
      throw InputError("SpecialSpd: determinant " + std::to_string(d) + " is not 1");
    }
    return SpecialSpd(p);
  }

  const SpdMatrix & spd() const { return p_; }
  const Matrix & matrix() const { return p_.matrix(); }
  Index order() const { return p_.order(); }

private:
  explicit SpecialSpd(SpdMatrix p) : p_(std::move(p)) {}
  SpdMatrix p_;
};

struct SymEigen
{
  Vector values;  // ascending
  Matrix frame;   // orthogonal, columns are eigenvectors
};

inline SymEigen sym_eigen(const SymMatrix & s)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  if (es.info() != Eigen::Success) {
    Matrix off = s.matrix();
    off.diagonal().setZero();
    throw NonConvergence("symmetric eigensolver did not converge", off.norm());
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

/// frame * diag(f(values)) * frame^T for a scalar function f.
template<typename F>
Matrix spectral_apply(const SymEigen & e, F && f)
{
  const Vector fv = e.values.unaryExpr(std::forward<F>(f));
  return symmetrized(e.frame * fv.asDiagonal() * e.frame.transpose());
}

inline SpdMatrix sym_exp(const SymMatrix & s)
{
  return SpdMatrix(spectral_apply(sym_eigen(s), [](double x) { return std::exp(x); }));
}

inline SymMatrix sym_log(const SpdMatrix & p)
{
  const auto e = sym_eigen(p.sym());
  if (e.values.minCoeff() <= 0.0) {
    throw NotPositiveDefinite("sym_log: non-positive eigenvalue");
  }
  return SymMatrix(spectral_apply(e, [](double x) { return std::log(x); }));
}

inline SpdMatrix spd_sqrt(const SpdMatrix & p)
{
  const auto e = sym_eigen(p.sym());
  if (e.values.minCoeff() <= 0.0) {
    throw NotPositiveDefinite("spd_sqrt: non-positive eigenvalue");
  }
  return SpdMatrix(spectral_apply(e, [](double x) { return std::sqrt(x); }));
}

inline SpdMatrix spd_inv_sqrt(const SpdMatrix & p)
{
  const auto e = sym_eigen(p.sym());
  if (e.values.minCoeff() <= 0.0) {
    throw NotPositiveDefinite("spd_inv_sqrt: non-positive eigenvalue");
  }
  return SpdMatrix(spectral_apply(e, [](double x) { return 1.0 / std::sqrt(x); }));
}

inline SpdMatrix spd_inverse(const SpdMatrix & p)
{
  Eigen::LLT<Matrix> llt(p.matrix());
  return SpdMatrix(Matrix(llt.solve(Matrix::Identity(p.order(), p.order()))));
}

// --- the (n, 1, n) block structure --------------------------------------

/// n for a matrix of order 2n+1.
inline Index half_order(Index order)
{
  if (order < 3 || order % 2 == 0) {
    throw InputError("expected a matrix of odd order 2n+1 with n >= 1, got order " + std::to_string(order));
  }
  return (order - 1) / 2;
}

/// Anti-block identity [[0,0,I],[0,1,0],[I,0,0]] of order 2n+1; J^2 = I.
inline Matrix j_matrix(Index n)
{
  Matrix j = Matrix::Zero(2 * n + 1, 2 * n + 1);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n).setIdentity();
  j(n, n) = 1.0;
  return j;
}

/// Frobenius norm of J G^{-1} J - G; zero exactly on the BDI submanifold.
inline double check_special_symmetry(const SpdMatrix & g)
{
  const Matrix j = j_matrix(half_order(g.order()));
  return (j * spd_inverse(g).matrix() * j - g.matrix()).norm();
}

/// Unit block-lower-triangular factor with (n, 1, n) blocks.
struct BlockUnitLower
{
  Index n = 0;
  RowVector m21;  // 1 x n
  Matrix m31;     // n x n
  Vector m32;     // n x 1

  Matrix dense() const
  {
    Matrix m = Matrix::Identity(2 * n + 1, 2 * n + 1);
    m.block(n, 0, 1, n) = m21;
    m.block(n + 1, 0, n, n) = m31;
    m.block(n + 1, n, n, 1) = m32;
    return m;
  }
};

struct BlockDiag3
{
  SpdMatrix d11;
  double d22 = 0.0;
  SpdMatrix d33;

  Matrix dense() const
  {
    const Index n = d11.order();
    Matrix d = Matrix::Zero(2 * n + 1, 2 * n + 1);
    d.topLeftCorner(n, n) = d11.matrix();
    d(n, n) = d22;
    d.bottomRightCorner(n, n) = d33.matrix();
    return d;
  }
};

/// G = M D M^T with G1 = M D (block lower) and G2 = M^T (block upper unipotent).
struct BlockCholesky
{
  BlockUnitLower m;
  BlockDiag3 d;

  Matrix reconstruct() const
  {
    const Matrix md = m.dense();
    return md * d.dense() * md.transpose();
  }
  Matrix lower_factor() const { return m.dense() * d.dense(); }
  Matrix upper_factor() const { return m.dense().transpose(); }
};

/**
 * Block LDL^T factorization of an SPD matrix of order 2n+1 with block sizes
 * (n, 1, n). No symmetry beyond G = G^T is assumed; the special structure
 * that appears when J G^{-1} J = G is reported by special_structure().
 *
 * Throws NotPositiveDefinite naming the pivot block that lost positivity.
 */
inline BlockCholesky block_cholesky(const SpdMatrix & g, Index n)
{
  if (g.order() != 2 * n + 1 || n < 1) {
    throw InputError("block_cholesky: order " + std::to_string(g.order()) + " does not match split (n,1,n) with n=" +
                     std::to_string(n));
  }
  const Matrix & a = g.matrix();

  const Matrix a11 = a.topLeftCorner(n, n);
  Eigen::LLT<Matrix> llt1(a11);
  if (llt1.info() != Eigen::Success) {
    throw NotPositiveDefinite("block_cholesky: pivot block 1 (leading n x n) is not positive definite");
  }
  const Matrix below = a.bottomLeftCorner(n + 1, n);
  const Matrix mult = llt1.solve(below.transpose()).transpose();  // (n+1) x n
  Matrix schur = symmetrized(a.bottomRightCorner(n + 1, n + 1) - mult * below.transpose());

  const double d22 = schur(0, 0);
  if (!(d22 > 0.0)) {
    throw NotPositiveDefinite("block_cholesky: pivot block 2 (middle 1 x 1) is not positive, value " +
                              std::to_string(d22));
  }
  const Vector m32 = schur.col(0).tail(n) / d22;
  const Matrix d33 = symmetrized(schur.bottomRightCorner(n, n) - d22 * m32 * m32.transpose());
  Eigen::LLT<Matrix> llt3(d33);
  if (llt3.info() != Eigen::Success) {
    throw NotPositiveDefinite("block_cholesky: pivot block 3 (trailing n x n) is not positive definite");
  }

  BlockCholesky out;
  out.m.n = n;
  out.m.m21 = mult.row(0);
  out.m.m31 = mult.bottomRows(n);
  out.m.m32 = m32;
  out.d.d11 = SpdMatrix(a11);
  out.d.d22 = d22;
  out.d.d33 = SpdMatrix(d33);
  return out;
}

/// Deviations of a block Cholesky factorization from the form forced by J G^{-1} J = G.
struct SpecialStructure
{
  double d22_deviation;  // |d22 - 1|
  double d33_deviation;  // |d33 - d11^{-1}| / |d11^{-1}|
  double m32_deviation;  // |m32 + m21^T|
  double m31_relation;   // |m31 + m31^T + m21^T m21|

  double max() const { return std::max({d22_deviation, d33_deviation, m32_deviation, m31_relation}); }
};

inline SpecialStructure special_structure(const BlockCholesky & f)
{
  const Matrix d11_inv = spd_inverse(f.d.d11).matrix();
  const Matrix m21t = f.m.m21.transpose();
  return {
      std::abs(f.d.d22 - 1.0),
      (f.d.d33.matrix() - d11_inv).norm() / d11_inv.norm(),
      (f.m.m32 + m21t).norm(),
      (f.m.m31 + f.m.m31.transpose() + m21t * f.m.m21).norm(),
  };
}

}  // namespace gaussgeo

#endif  // GAUSSGEO_MATCORE_HPP
