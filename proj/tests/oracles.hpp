#ifndef GAUSSGEO_TESTS_ORACLES_HPP
#define GAUSSGEO_TESTS_ORACLES_HPP

// Reference computations that share no code path with the library.

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "gaussgeo/matcore.hpp"

namespace oracle {

using gaussgeo::Index;
using gaussgeo::Matrix;
using gaussgeo::Vector;

/// Scalar LDL^T by plain Gaussian elimination without pivoting.
inline std::pair<Matrix, Vector> scalar_ldl(const Matrix & g)
{
  const Index m = g.rows();
  Matrix a = g;
  Matrix l = Matrix::Identity(m, m);
  Vector d(m);
  for (Index k = 0; k < m; ++k) {
    d(k) = a(k, k);
    for (Index i = k + 1; i < m; ++i) {
      l(i, k) = a(i, k) / d(k);
    }
    for (Index i = k + 1; i < m; ++i) {
      for (Index j = k + 1; j < m; ++j) {
        a(i, j) -= l(i, k) * d(k) * l(j, k);
      }
    }
  }
  return {l, d};
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
inline Matrix unit_lower_inverse(const Matrix & l)
{
  const Index m = l.rows();
  Matrix x = Matrix::Identity(m, m);
  for (Index col = 0; col < m; ++col) {
    for (Index i = col + 1; i < m; ++i) {
      double s = 0.0;
      for (Index k = col; k < i; ++k) {
        s += l(i, k) * x(k, col);
      }
      x(i, col) = -s;
    }
  }
  return x;
}

struct BlockLdl
{
  Matrix m;  // unit block-lower, blocks (n, 1, n)
  Matrix d;  // block diagonal
};

/// Block LDL^T regrouped from the scalar factorization: G = L diag(d) L^T = M D M^T.
inline BlockLdl block_ldl(const Matrix & g, Index n)
{
  const auto [l, d] = scalar_ldl(g);
  const Index m = g.rows();
  Matrix diag_l = Matrix::Zero(m, m);
  diag_l.topLeftCorner(n, n) = l.topLeftCorner(n, n);
  diag_l(n, n) = 1.0;
  diag_l.bottomRightCorner(n, n) = l.bottomRightCorner(n, n);
  BlockLdl out;
  out.m = l * unit_lower_inverse(diag_l);
  out.d = diag_l * d.asDiagonal() * diag_l.transpose();
  return out;
}

/// Classical RK4 on the geodesic equations
///   Sigma'' = Sigma' Sigma^{-1} Sigma' - mu' mu'^T,  mu'' = Sigma' Sigma^{-1} mu'.
struct GeodesicState
{
  Matrix s, ds;
  Vector m, dm;
};

inline GeodesicState geodesic_ode_rhs(const GeodesicState & y)
{
  const Matrix inv = y.s.inverse();
  return {y.ds, y.ds * inv * y.ds - y.dm * y.dm.transpose(), y.dm, y.ds * inv * y.dm};
}

inline GeodesicState axpy(const GeodesicState & y, double h, const GeodesicState & k)
{
  return {y.s + h * k.s, y.ds + h * k.ds, y.m + h * k.m, y.dm + h * k.dm};
}

inline GeodesicState integrate_geodesic(GeodesicState y, double t_end, int steps)
{
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const auto k1 = geodesic_ode_rhs(y);
    const auto k2 = geodesic_ode_rhs(axpy(y, h / 2, k1));
    const auto k3 = geodesic_ode_rhs(axpy(y, h / 2, k2));
    const auto k4 = geodesic_ode_rhs(axpy(y, h, k3));
    y.s += h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
    y.ds += h / 6 * (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds);
    y.m += h / 6 * (k1.m + 2 * k2.m + 2 * k3.m + k4.m);
    y.dm += h / 6 * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm);
  }
  return y;
}

/// General (non-symmetric) matrix exponential, Pade scaling and squaring.
inline Matrix expm(const Matrix & x) { return x.exp(); }

/// Symmetric exponential via a truncated Taylor series with scaling and squaring.
inline Matrix taylor_exp(const Matrix & x)
{
  int squarings = 0;
  double norm = x.norm();
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const Matrix y = x / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(x.rows(), x.cols());
  Matrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * y / k;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) {
    sum = sum * sum;
  }
  return sum;
}

}  // namespace oracle

#endif  // GAUSSGEO_TESTS_ORACLES_HPP
