#ifndef GAUSSGEO_MANIFOLD_HPP
#define GAUSSGEO_MANIFOLD_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/matcore.hpp"

namespace gaussgeo {

/// A normal distribution N(mu, Sigma), i.e. a point of the manifold N.
class GaussianPoint
{
public:
  GaussianPoint() = default;

  GaussianPoint(SpdMatrix sigma, Vector mu) : sigma_(std::move(sigma)), mu_(std::move(mu))
  {
    if (sigma_.order() != mu_.size()) {
      throw InputError("GaussianPoint: covariance order " + std::to_string(sigma_.order()) +
                       " does not match mean length " + std::to_string(mu_.size()));
    }
  }

  /// (identity, 0)
  static GaussianPoint standard(Index n) { return {SpdMatrix::identity(n), Vector::Zero(n)}; }

  Index dim() const { return mu_.size(); }
  const SpdMatrix & sigma() const { return sigma_; }
  const Vector & mu() const { return mu_; }

private:
  SpdMatrix sigma_;
  Vector mu_;
};

/// Natural parameters: theta = Sigma^{-1}, delta = Sigma^{-1} mu.
struct NaturalPoint
{
  SpdMatrix theta;
  Vector delta;
};

inline NaturalPoint to_natural(const GaussianPoint & p)
{
  SpdMatrix theta = spd_inverse(p.sigma());
  Vector delta = theta.matrix() * p.mu();
  return {std::move(theta), std::move(delta)};
}

inline GaussianPoint from_natural(const NaturalPoint & np)
{
  SpdMatrix sigma = spd_inverse(np.theta);
  Vector mu = sigma.matrix() * np.delta;
  return {std::move(sigma), std::move(mu)};
}

/// Relative mismatch of the corner entry of [[theta, delta],[delta^T, c]] against 1 + delta^T theta^{-1} delta.
inline double corner_defect(const Matrix & h)
{
  const Index n = h.rows() - 1;
  const Matrix theta = h.topLeftCorner(n, n);
  const Vector delta = h.col(n).head(n);
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("corner_defect: leading block is not positive definite");
  }
  const double expected = 1.0 + delta.dot(llt.solve(delta));
  return std::abs(h(n, n) - expected) / std::max(1.0, std::abs(expected));
}

/**
 * A point of N realized as the order-(n+1) SPD matrix
 *   [[theta, delta], [delta^T, 1 + delta^T theta^{-1} delta]].
 */
class EmbeddedPoint
{
public:
  static EmbeddedPoint checked(const SpdMatrix & h, double tol = 1e-10)
  {
    if (h.order() < 2) {
      throw InputError("EmbeddedPoint: order must be at least 2");
    }
    const double defect = corner_defect(h.matrix());
    if (defect > tol) {
      throw InputError("EmbeddedPoint: corner entry inconsistent with leading blocks (relative defect " +
                       std::to_string(defect) + "); not a point of N");
    }
    return EmbeddedPoint(h);
  }

  Index dim() const { return h_.order() - 1; }
  const SpdMatrix & spd() const { return h_; }
  const Matrix & matrix() const { return h_.matrix(); }

private:
  explicit EmbeddedPoint(SpdMatrix h) : h_(std::move(h)) {}
  SpdMatrix h_;
};

inline constexpr double kUnembedConsistencyTol = 1e-8;

inline EmbeddedPoint embed(const GaussianPoint & p)
{
  const Index n = p.dim();
  const auto np = to_natural(p);
  Matrix h(n + 1, n + 1);
  h.topLeftCorner(n, n) = np.theta.matrix();
  h.col(n).head(n) = np.delta;
  h.row(n).head(n) = np.delta.transpose();
  h(n, n) = 1.0 + np.delta.dot(p.mu());  // delta^T theta^{-1} delta = delta^T mu
  return EmbeddedPoint::checked(SpdMatrix(h));
}

inline GaussianPoint unembed(const SpdMatrix & h, double consistency_tol = kUnembedConsistencyTol)
{
  const auto e = EmbeddedPoint::checked(h, consistency_tol);
  const Index n = e.dim();
  return from_natural({SpdMatrix(Matrix(h.matrix().topLeftCorner(n, n))), h.matrix().col(n).head(n)});
}

inline GaussianPoint unembed(const EmbeddedPoint & e) { return unembed(e.spd()); }

/// |inverse([[Sigma + mu mu^T, -mu], [-mu^T, 1]]) - embed(p)|_F
inline double alt_embed_check(const GaussianPoint & p)
{
  const Index n = p.dim();
  Matrix alt(n + 1, n + 1);
  alt.topLeftCorner(n, n) = p.sigma().matrix() + p.mu() * p.mu().transpose();
  alt.col(n).head(n) = -p.mu();
  alt.row(n).head(n) = -p.mu().transpose();
  alt(n, n) = 1.0;
  return (Matrix(alt.inverse()) - embed(p).matrix()).norm();
}

// --- tangent vectors -------------------------------------------------------

/**
 * Tangent vector (A0, a0) in the chart normalized at a base point. At the
 * standard point (identity, 0) these are the velocities (Sigma', mu').
 */
struct TangentN
{
  SymMatrix dsigma;
  Vector dmu;

  static TangentN zero(Index n) { return {SymMatrix::zero(n), Vector::Zero(n)}; }

  Index dim() const { return dmu.size(); }

  friend TangentN operator+(const TangentN & x, const TangentN & y) { return {x.dsigma + y.dsigma, x.dmu + y.dmu}; }
  friend TangentN operator-(const TangentN & x, const TangentN & y) { return {x.dsigma - y.dsigma, x.dmu - y.dmu}; }
  friend TangentN operator*(double s, const TangentN & x) { return {s * x.dsigma, s * x.dmu}; }
};

inline Index tangent_dimension(Index n) { return n * (n + 3) / 2; }

/// Packs the upper triangle of dsigma (row-major, diagonal included) followed by dmu.
inline Vector tangent_coordinates(const TangentN & x)
{
  const Index n = x.dim();
  Vector c(tangent_dimension(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      c(k++) = x.dsigma(i, j);
    }
  }
  c.tail(n) = x.dmu;
  return c;
}

inline TangentN tangent_from_coordinates(const Vector & c, Index n)
{
  if (c.size() != tangent_dimension(n)) {
    throw InputError("tangent_from_coordinates: wrong coordinate count");
  }
  Matrix a(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      a(i, j) = a(j, i) = c(k++);
    }
  }
  return {SymMatrix(a), c.tail(n)};
}

/// Coordinate basis: symmetric units E_ii, E_ij + E_ji (i < j), then unit mean directions.
inline std::vector<TangentN> tangent_basis(Index n)
{
  std::vector<TangentN> basis;
  for (Index k = 0; k < tangent_dimension(n); ++k) {
    basis.push_back(tangent_from_coordinates(Vector::Unit(tangent_dimension(n), k), n));
  }
  return basis;
}

/// sqrt(|A0|_F^2 + |a0|^2); coordinate size, not a Riemannian length.
inline double coefficient_norm(const TangentN & x)
{
  return std::sqrt(x.dsigma.matrix().squaredNorm() + x.dmu.squaredNorm());
}

enum class MetricConvention
{
  paper,   // <X, Y> = 2 Tr(T(X) T(Y)) on embedded tangents
  fisher,  // statistical Fisher information; 1/4 of the above
};

/// Fisher quadratic form = kFisherScale * (2 Tr form). Pinned by the quadrature oracle in the tests.
inline constexpr double kFisherScale = 0.25;

/// Embedded tangent [[-A0, a0], [a0^T, 0]].
inline Matrix tangent_matrix(const TangentN & x)
{
  const Index n = x.dim();
  Matrix t = Matrix::Zero(n + 1, n + 1);
  t.topLeftCorner(n, n) = -x.dsigma.matrix();
  t.col(n).head(n) = x.dmu;
  t.row(n).head(n) = x.dmu.transpose();
  return t;
}

inline double metric_at_identity(const TangentN & x, const TangentN & y,
                                 MetricConvention convention = MetricConvention::paper)
{
  if (x.dim() != y.dim() || x.dsigma.order() != x.dim() || y.dsigma.order() != y.dim()) {
    throw InputError("metric_at_identity: dimension mismatch");
  }
  const double paper = 2.0 * (tangent_matrix(x) * tangent_matrix(y)).trace();
  return convention == MetricConvention::paper ? paper : kFisherScale * paper;
}

inline double tangent_norm(const TangentN & x, MetricConvention convention = MetricConvention::paper)
{
  return std::sqrt(std::max(0.0, metric_at_identity(x, x, convention)));
}

// --- affine normalization --------------------------------------------------

/// x -> A x + b, acting on distributions by (Sigma, mu) -> (A Sigma A^T, A mu + b).
struct AffineMap
{
  Matrix a;
  Vector b;
};

inline GaussianPoint apply(const AffineMap & map, const GaussianPoint & q)
{
  return {SpdMatrix(Matrix(map.a * q.sigma().matrix() * map.a.transpose())), map.a * q.mu() + map.b};
}

inline AffineMap inverse(const AffineMap & map)
{
  Matrix ainv = map.a.inverse();
  Vector binv = -ainv * map.b;
  return {std::move(ainv), std::move(binv)};
}

/// Differential of the affine action on raw velocities (Sigma', mu').
inline TangentN push_tangent(const AffineMap & map, const TangentN & x)
{
  return {SymMatrix(Matrix(map.a * x.dsigma.matrix() * map.a.transpose())), map.a * x.dmu};
}

/// The map A = Sigma_p^{-1/2}, b = -A mu_p sending p to (identity, 0).
inline AffineMap normalize_to_identity(const GaussianPoint & p)
{
  Matrix a = spd_inv_sqrt(p.sigma()).matrix();
  Vector b = -a * p.mu();
  return {std::move(a), std::move(b)};
}

/// Inner product of raw velocities at p, pulled back through the normalizing affine map.
inline double metric_at(const GaussianPoint & p, const TangentN & x, const TangentN & y,
                        MetricConvention convention = MetricConvention::paper)
{
  const auto map = normalize_to_identity(p);
  return metric_at_identity(push_tangent(map, x), push_tangent(map, y), convention);
}

// --- Fisher information by quadrature ---------------------------------------

struct QuadratureRule
{
  Vector nodes;
  Vector weights;
};

/// Gauss-Hermite rule for weight exp(-x^2) (Golub-Welsch).
inline QuadratureRule gauss_hermite(int count)
{
  if (count < 1) {
    throw InputError("gauss_hermite: node count must be positive");
  }
  Matrix jacobi = Matrix::Zero(count, count);
  for (int k = 1; k < count; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(0.5 * k);
  }
  const auto e = sym_eigen(SymMatrix(jacobi));
  const double mass = std::sqrt(std::numbers::pi);
  Vector w = mass * e.frame.row(0).transpose().array().square();
  return {e.values, std::move(w)};
}

inline constexpr Index kFisherMaxDim = 3;

/**
 * E[(X log p)(Y log p)] under N(mu, Sigma) by a tensor-product Gauss-Hermite
 * rule. X, Y are raw velocities (Sigma', mu'); the scores are analytic:
 *   X log p = -1/2 Tr(S A) + 1/2 z^T S A S z + a^T S z,  S = Sigma^{-1}, z = x - mu.
 */
inline double fisher_numeric(const GaussianPoint & p, const TangentN & x, const TangentN & y, int nodes = 20)
{
  const Index n = p.dim();
  if (n > kFisherMaxDim) {
    throw InputError("fisher_numeric: unsupported dimension " + std::to_string(n) + " (at most 3)");
  }
  if (x.dim() != n || y.dim() != n) {
    throw InputError("fisher_numeric: dimension mismatch");
  }
  const auto rule = gauss_hermite(nodes);
  const Matrix s = spd_inverse(p.sigma()).matrix();
  const Matrix chol = Eigen::LLT<Matrix>(p.sigma().matrix()).matrixL();
  const Matrix sas_x = s * x.dsigma.matrix() * s;
  const Matrix sas_y = s * y.dsigma.matrix() * s;
  const Vector sa_x = s * x.dmu;
  const Vector sa_y = s * y.dmu;
  const double tr_x = (s * x.dsigma.matrix()).trace();
  const double tr_y = (s * y.dsigma.matrix()).trace();

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector u(n);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (Index k = 0; k < n; ++k) {
      u(k) = rule.nodes(idx[k]);
      w *= rule.weights(idx[k]);
    }
    const Vector z = std::sqrt(2.0) * chol * u;
    const double score_x = -0.5 * tr_x + 0.5 * z.dot(sas_x * z) + sa_x.dot(z);
    const double score_y = -0.5 * tr_y + 0.5 * z.dot(sas_y * z) + sa_y.dot(z);
    total += w * score_x * score_y;

    Index k = 0;
    while (k < n && ++idx[k] == nodes) {
      idx[k++] = 0;
    }
    if (k == n) {
      break;
    }
  }
  return total / std::pow(std::numbers::pi, 0.5 * static_cast<double>(n));
}

// --- sampling helpers --------------------------------------------------------

/// Tangent with Gaussian direction rescaled to the given coefficient norm.
template<typename Rng>
TangentN random_tangent(Index n, double norm, Rng & rng)
{
  std::normal_distribution<double> g;
  Vector c(tangent_dimension(n));
  for (Index k = 0; k < c.size(); ++k) {
    c(k) = g(rng);
  }
  TangentN x = tangent_from_coordinates(c, n);
  return (norm / coefficient_norm(x)) * x;
}

/// Random distribution with covariance eigenvalues in [e^-1, e] and mean entries in [-1, 1].
template<typename Rng>
GaussianPoint random_point(Index n, Rng & rng)
{
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix raw(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      raw(i, j) = g(rng);
    }
  }
  const Matrix frame = Eigen::HouseholderQR<Matrix>(raw).householderQ();
  Vector logs(n), mu(n);
  for (Index i = 0; i < n; ++i) {
    logs(i) = u(rng);
    mu(i) = u(rng);
  }
  const Matrix sigma = frame * logs.array().exp().matrix().asDiagonal() * frame.transpose();
  return {SpdMatrix(sigma), mu};
}

}  // namespace gaussgeo

#endif  // GAUSSGEO_MANIFOLD_HPP
