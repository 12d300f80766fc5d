#ifndef GAUSSGEO_SYMPAIR_HPP
#define GAUSSGEO_SYMPAIR_HPP

// The symmetric pair SL(2n+1)/SO(2n+1) > SO(n+1,n)/S(O(n+1) x O(n)) and the
// submersion onto N. Matrices of order 2n+1 are split into blocks (n, 1, n).

#include <string>
#include <utility>

#include "gaussgeo/manifold.hpp"
#include "gaussgeo/matcore.hpp"

namespace gaussgeo {

/// sigma(X) = -J X^T J on sl(2n+1); its fixed points form so(n+1, n).
inline Matrix sigma_involution(const Matrix & x)
{
  const Matrix j = j_matrix(half_order(x.rows()));
  return -j * x.transpose() * j;
}

/// sigma(g) = J g^{-T} J on SL(2n+1).
inline Matrix sigma_group(const Matrix & g)
{
  const Matrix j = j_matrix(half_order(g.rows()));
  return j * g.inverse().transpose() * j;
}

/// tau(X) = -X^T; fixed points are so(2n+1).
inline Matrix tau_involution(const Matrix & x) { return -x.transpose(); }

/**
 * Element of g = so(n+1, n) written as
 *   [[-Q, r, R], [t^T, 0, -r^T], [S, -t, Q^T]]
 * with Q arbitrary and R, S skew. sigma(X) = X holds by construction.
 */
class LieAlgG
{
public:
  LieAlgG(Matrix q, Matrix upper_skew, Matrix lower_skew, Vector r, Vector t)
      : q_(std::move(q)), upper_(std::move(upper_skew)), lower_(std::move(lower_skew)), r_(std::move(r)),
        t_(std::move(t))
  {
    const Index n = r_.size();
    if (n < 1 || q_.rows() != n || q_.cols() != n || upper_.rows() != n || upper_.cols() != n ||
        lower_.rows() != n || lower_.cols() != n || t_.size() != n) {
      throw InputError("LieAlgG: inconsistent block sizes");
    }
    const double scale = std::max(1.0, std::max(upper_.cwiseAbs().maxCoeff(), lower_.cwiseAbs().maxCoeff()));
    if ((upper_ + upper_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale ||
        (lower_ + lower_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InputError("LieAlgG: corner blocks must be skew-symmetric");
    }
    upper_ = 0.5 * (upper_ - upper_.transpose());
    lower_ = 0.5 * (lower_ - lower_.transpose());
  }

  /// Reads the blocks of a (2n+1)-matrix; rejects matrices not fixed by sigma.
  static LieAlgG from_matrix(const Matrix & x, double tol = 1e-12)
  {
    const Index n = half_order(x.rows());
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if ((sigma_involution(x) - x).cwiseAbs().maxCoeff() > tol * scale) {
      throw InputError("LieAlgG: matrix is not in so(n+1, n)");
    }
    return {-x.topLeftCorner(n, n), x.topRightCorner(n, n), x.bottomLeftCorner(n, n), x.block(0, n, n, 1),
            x.block(n, 0, 1, n).transpose()};
  }

  Matrix matrix() const
  {
    const Index n = dim();
    Matrix x = Matrix::Zero(2 * n + 1, 2 * n + 1);
    x.topLeftCorner(n, n) = -q_;
    x.block(0, n, n, 1) = r_;
    x.topRightCorner(n, n) = upper_;
    x.block(n, 0, 1, n) = t_.transpose();
    x.block(n, n + 1, 1, n) = -r_.transpose();
    x.bottomLeftCorner(n, n) = lower_;
    x.block(n + 1, n, n, 1) = -t_;
    x.bottomRightCorner(n, n) = q_.transpose();
    return x;
  }

  Index dim() const { return r_.size(); }
  const Matrix & q() const { return q_; }
  const Matrix & upper_skew() const { return upper_; }
  const Matrix & lower_skew() const { return lower_; }
  const Vector & r() const { return r_; }
  const Vector & t() const { return t_; }

  /// Member of the -1 eigenspace of tau: Q symmetric, S = -R, t = r.
  bool is_m_shaped(double tol = 1e-12) const
  {
    const double scale = std::max(1.0, matrix().cwiseAbs().maxCoeff());
    return asymmetry(q_) <= tol * scale && (lower_ + upper_).cwiseAbs().maxCoeff() <= tol * scale &&
           (t_ - r_).cwiseAbs().maxCoeff() <= tol * scale;
  }

private:
  Matrix q_, upper_, lower_;
  Vector r_, t_;
};

/**
 * The generator V = [[-A0, a0, 0], [a0^T, 0, -a0^T], [0, -a0, A0]] of the
 * horizontal geodesic exp(tV) through the identity. V is symmetric,
 * traceless, and -J V J = V.
 */
class HorizontalGenerator
{
public:
  explicit HorizontalGenerator(TangentN xi) : xi_(std::move(xi))
  {
    if (xi_.dim() < 1 || xi_.dsigma.order() != xi_.dim()) {
      throw InputError("HorizontalGenerator: tangent blocks have inconsistent sizes");
    }
  }

  const TangentN & tangent() const { return xi_; }
  Index dim() const { return xi_.dim(); }

  SymMatrix matrix() const
  {
    const Index n = dim();
    Matrix v = Matrix::Zero(2 * n + 1, 2 * n + 1);
    v.topLeftCorner(n, n) = -xi_.dsigma.matrix();
    v.block(0, n, n, 1) = xi_.dmu;
    v.block(n, 0, 1, n) = xi_.dmu.transpose();
    v.block(n, n + 1, 1, n) = -xi_.dmu.transpose();
    v.block(n + 1, n, n, 1) = -xi_.dmu;
    v.bottomRightCorner(n, n) = xi_.dsigma.matrix();
    return SymMatrix(v);
  }

  LieAlgG algebra_element() const { return LieAlgG::from_matrix(matrix().matrix()); }

private:
  TangentN xi_;
};

inline HorizontalGenerator build_V(const TangentN & xi) { return HorizontalGenerator(xi); }

struct KmSplit
{
  LieAlgG k;  // fixed by tau (skew part)
  LieAlgG m;  // -1 eigenspace of tau (symmetric part)
};

inline KmSplit decompose_km(const LieAlgG & x)
{
  const Matrix a = x.matrix();
  return {LieAlgG::from_matrix(0.5 * (a - a.transpose())), LieAlgG::from_matrix(0.5 * (a + a.transpose()))};
}

struct HorizontalSplit
{
  HorizontalGenerator horizontal;  // keeps (Q, r)
  LieAlgG vertical;                // keeps R
};

/// Splits an element of m into its horizontal part and the R-block, which spans the kernel of d(pi) at identity.
inline HorizontalSplit horizontal_vertical_split(const LieAlgG & xm)
{
  if (!xm.is_m_shaped()) {
    throw InputError("horizontal_vertical_split: input is not in m");
  }
  const Index n = xm.dim();
  HorizontalGenerator h(TangentN{SymMatrix(xm.q()), xm.r()});
  LieAlgG v(Matrix::Zero(n, n), xm.upper_skew(), -xm.upper_skew(), Vector::Zero(n), Vector::Zero(n));
  return {std::move(h), std::move(v)};
}

/// Differential of pi at the identity: the leading (n+1)-block [[-Q, r], [r^T, 0]] read back as (Q, r).
inline TangentN dpi(const LieAlgG & xm)
{
  if (!xm.is_m_shaped()) {
    throw InputError("dpi: input is not in m");
  }
  return {SymMatrix(xm.q()), xm.r()};
}

/**
 * A point of the BDI submanifold: unit determinant, J G^{-1} J = G, and a
 * leading (n+1)-block that is a valid embedded point of N.
 */
class PointM
{
public:
  static PointM checked(const SpdMatrix & g, double tol = tolerance::symmetry)
  {
    const Index n = half_order(g.order());
    auto special = SpecialSpd::checked(g);
    const double residual = check_special_symmetry(g);
    if (residual > tol * std::max(1.0, g.matrix().norm())) {
      throw InputError("PointM: J G^{-1} J != G (residual " + std::to_string(residual) + ")");
    }
    auto head = EmbeddedPoint::checked(SpdMatrix(Matrix(g.matrix().topLeftCorner(n + 1, n + 1))));
    return PointM(std::move(special), std::move(head));
  }

  const SpdMatrix & spd() const { return g_.spd(); }
  const Matrix & matrix() const { return g_.matrix(); }
  Index dim() const { return head_.dim(); }

  Matrix theta() const { return matrix().topLeftCorner(dim(), dim()); }
  Vector delta() const { return matrix().block(0, dim(), dim(), 1); }
  Matrix g13() const { return matrix().topRightCorner(dim(), dim()); }
  RowVector g23() const { return matrix().block(dim(), dim() + 1, 1, dim()); }
  Matrix g33() const { return matrix().bottomRightCorner(dim(), dim()); }

  const EmbeddedPoint & head() const { return head_; }

private:
  PointM(SpecialSpd g, EmbeddedPoint head) : g_(std::move(g)), head_(std::move(head)) {}
  SpecialSpd g_;
  EmbeddedPoint head_;
};

/// pi(m) = leading (n+1) x (n+1) block.
inline EmbeddedPoint submersion_pi(const PointM & m) { return m.head(); }

}  // namespace gaussgeo

#endif  // GAUSSGEO_SYMPAIR_HPP
