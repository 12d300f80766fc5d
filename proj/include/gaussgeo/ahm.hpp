#ifndef GAUSSGEO_AHM_HPP
#define GAUSSGEO_AHM_HPP

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/geodesic.hpp"
#include "gaussgeo/manifold.hpp"
#include "gaussgeo/matcore.hpp"
#include "gaussgeo/sympair.hpp"

namespace gaussgeo {

/// One state of the arithmetic-harmonic mean recursion.
struct AhmPair
{
  SpdMatrix p;
  SpdMatrix q;
  int iter = 0;

  double gap() const { return (q.matrix() - p.matrix()).norm(); }
};

/// P' = (P + Q) / 2,  Q' = 2 (P^{-1} + Q^{-1})^{-1}.
inline AhmPair ahm_step(const AhmPair & pair)
{
  if (pair.p.order() != pair.q.order()) {
    throw InputError("ahm_step: matrices have different orders");
  }
  const Matrix arith = 0.5 * (pair.p.matrix() + pair.q.matrix());
  const Matrix harm_inv = spd_inverse(pair.p).matrix() + spd_inverse(pair.q).matrix();
  try {
    SpdMatrix next_p(arith);
    SpdMatrix next_q(spd_inverse(SpdMatrix(harm_inv)).matrix() * 2.0);
    return {std::move(next_p), std::move(next_q), pair.iter + 1};
  } catch (const NotPositiveDefinite &) {
    throw NotPositiveDefinite("ahm_step: iterate lost positive definiteness at iteration " +
                              std::to_string(pair.iter + 1));
  }
}

/// |(Q'-P') + 1/2 (Q-P)(P+Q)^{-1}(Q-P)|_F; zero in exact arithmetic.
inline double gap_identity_residual(const AhmPair & before, const AhmPair & after)
{
  const Matrix diff = before.q.matrix() - before.p.matrix();
  const Matrix sum = before.p.matrix() + before.q.matrix();
  const Matrix predicted = -0.5 * diff * sum.llt().solve(diff);
  return (after.q.matrix() - after.p.matrix() - predicted).norm();
}

struct AhmOptions
{
  double tol = 1e-12;
  int max_iter = 60;
  bool keep_history = false;
};

struct AhmResult
{
  SpdMatrix midpoint;
  int iterations = 0;
  std::vector<double> gaps;      // gap of every pair, starting with the input
  std::vector<AhmPair> history;  // filled when keep_history is set
};

/**
 * Iterates ahm_step until |P_k - Q_k|_F <= tol * max(1, |P_k|_F) and returns
 * (P_k + Q_k) / 2, the geodesic midpoint of P0 and Q0 for the affine-invariant
 * metric. Convergence is quadratic.
 */
inline AhmResult ahm_run(const SpdMatrix & p0, const SpdMatrix & q0, const AhmOptions & opts = {})
{
  if (p0.order() != q0.order()) {
    throw InputError("ahm_midpoint: matrices have different orders");
  }
  AhmPair pair{p0, q0, 0};
  AhmResult out;
  while (true) {
    const double gap = pair.gap();
    out.gaps.push_back(gap);
    if (opts.keep_history) {
      out.history.push_back(pair);
    }
    if (gap <= opts.tol * std::max(1.0, pair.p.matrix().norm())) {
      out.midpoint = SpdMatrix(Matrix(0.5 * (pair.p.matrix() + pair.q.matrix())));
      out.iterations = pair.iter;
      return out;
    }
    if (pair.iter >= opts.max_iter) {
      throw NonConvergence("ahm_midpoint: iteration limit reached", gap);
    }
    pair = ahm_step(pair);
  }
}

inline SpdMatrix ahm_midpoint(const SpdMatrix & p0, const SpdMatrix & q0, const AhmOptions & opts = {})
{
  return ahm_run(p0, q0, opts).midpoint;
}

/// P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{1/2}, the closed-form midpoint.
inline SpdMatrix geometric_midpoint(const SpdMatrix & p, const SpdMatrix & q)
{
  const SpdMatrix root = spd_sqrt(p);
  const SpdMatrix inv_root = spd_inv_sqrt(p);
  const SpdMatrix inner(Matrix(inv_root.matrix() * q.matrix() * inv_root.matrix()));
  return SpdMatrix(Matrix(root.matrix() * spd_sqrt(inner).matrix() * root.matrix()));
}

// --- midpoints on N -------------------------------------------------------------

struct MidpointOptions
{
  LogMapOptions shooting;
  AhmOptions ahm;
};

struct MidpointReport
{
  GaussianPoint midpoint;
  GaussianPoint halfway;     // exp_map_from(p, xi, 1/2), the independent route
  double cross_check = 0.0;  // |embed(midpoint) - embed(halfway)|_F / max(1, |embed(halfway)|_F)
  double lift_symmetry = 0.0;  // |J R^{-1} J - R|_F for the lifted midpoint R
  TangentN xi;
  int ahm_iterations = 0;
};

namespace detail {

/// Projects a lifted point of the BDI submanifold to N in the chart normalized at p.
inline GaussianPoint project_lifted(const SpdMatrix & lifted, const AffineMap & denormalize)
{
  const Index n = half_order(lifted.order());
  const double residual = check_special_symmetry(lifted);
  if (residual > tolerance::symmetry * std::max(1.0, lifted.matrix().norm())) {
    throw NumericalError("midpoint: lifted AHM limit left the BDI submanifold (residual " +
                         std::to_string(residual) + ")");
  }
  const auto head = EmbeddedPoint::checked(SpdMatrix(Matrix(lifted.matrix().topLeftCorner(n + 1, n + 1))));
  return apply(denormalize, unembed(head));
}

}  // namespace detail

/**
 * Midpoint of the geodesic segment from p to q: normalize p to the identity,
 * shoot for xi, lift the endpoints to I and exp(V(xi)), run the AHM
 * recursion in SL(2n+1)/SO(2n+1), project the limit, and map back.
 */
inline MidpointReport midpoint_report(const GaussianPoint & p, const GaussianPoint & q,
                                      const MidpointOptions & opts = {})
{
  const Index n = p.dim();
  const auto to_identity = normalize_to_identity(p);
  const auto back = inverse(to_identity);
  TangentN xi = log_map(p, q, opts.shooting);

  const SpdMatrix lifted_p = SpdMatrix::identity(2 * n + 1);
  const SpdMatrix lifted_q = lifted_geodesic(xi, 1.0);
  const AhmResult ahm = ahm_run(lifted_p, lifted_q, opts.ahm);

  MidpointReport out;
  out.lift_symmetry = check_special_symmetry(ahm.midpoint);
  out.midpoint = detail::project_lifted(ahm.midpoint, back);
  out.halfway = exp_map_from(p, xi, 0.5);
  const Matrix he = embed(out.halfway).matrix();
  out.cross_check = (embed(out.midpoint).matrix() - he).norm() / std::max(1.0, he.norm());
  out.xi = std::move(xi);
  out.ahm_iterations = ahm.iterations;
  return out;
}

inline GaussianPoint midpoint_N(const GaussianPoint & p, const GaussianPoint & q, const MidpointOptions & opts = {})
{
  return midpoint_report(p, q, opts).midpoint;
}

/**
 * 2^depth + 1 points along the geodesic from p to q. The segment is lifted
 * once; every dyadic point is the AHM midpoint of its two lifted neighbours,
 * then projected. Endpoints are returned exactly.
 */
inline std::vector<GaussianPoint> interpolate(const GaussianPoint & p, const GaussianPoint & q, int depth,
                                              const MidpointOptions & opts = {})
{
  if (depth < 1 || depth > 20) {
    throw InputError("interpolate: depth must be in [1, 20]");
  }
  const Index n = p.dim();
  const auto back = inverse(normalize_to_identity(p));
  const TangentN xi = log_map(p, q, opts.shooting);

  const std::size_t count = (std::size_t{1} << depth) + 1;
  std::vector<SpdMatrix> lifted(count);
  lifted.front() = SpdMatrix::identity(2 * n + 1);
  lifted.back() = lifted_geodesic(xi, 1.0);
  for (std::size_t width = count - 1; width > 1; width /= 2) {
    for (std::size_t lo = 0; lo + width < count; lo += width) {
      lifted[lo + width / 2] = ahm_midpoint(lifted[lo], lifted[lo + width], opts.ahm);
    }
  }

  std::vector<GaussianPoint> out;
  out.reserve(count);
  out.push_back(p);
  for (std::size_t i = 1; i + 1 < count; ++i) {
    out.push_back(detail::project_lifted(lifted[i], back));
  }
  out.push_back(q);
  return out;
}

}  // namespace gaussgeo

#endif  // GAUSSGEO_AHM_HPP
