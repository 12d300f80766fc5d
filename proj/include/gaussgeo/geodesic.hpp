#ifndef GAUSSGEO_GEODESIC_HPP
#define GAUSSGEO_GEODESIC_HPP

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/manifold.hpp"
#include "gaussgeo/matcore.hpp"
#include "gaussgeo/sympair.hpp"

namespace gaussgeo {

/// G(t) = exp(t V), the horizontal geodesic of the BDI submanifold through the identity.
inline SpdMatrix lifted_geodesic(const TangentN & xi, double t) { return sym_exp(t * build_V(xi).matrix()); }

/// Relative deviation from the J-symmetric block Cholesky form tolerated before exp_map refuses a lift.
inline constexpr double kLiftStructureTol = 1e-6;

/**
 * pi(exp(t V)): the embedded point reached at time t from (identity, 0) with
 * initial velocity xi. The lift is factored by block Cholesky and its
 * structure checked before projecting.
 */
inline EmbeddedPoint exp_map_embedded(const TangentN & xi, double t)
{
  const SpdMatrix g = lifted_geodesic(xi, t);
  const auto structure = special_structure(block_cholesky(g, xi.dim()));
  if (structure.max() > kLiftStructureTol) {
    throw NumericalError("exp_map: lifted point lost the J-symmetric block structure (deviation " +
                         std::to_string(structure.max()) + ")");
  }
  return submersion_pi(PointM::checked(g, kLiftStructureTol));
}

/// Geodesic from (identity, 0) with initial velocity (Sigma', mu') = (A0, a0), evaluated at t.
inline GaussianPoint exp_map(const TangentN & xi, double t) { return unembed(exp_map_embedded(xi, t)); }

/// Geodesic from p; xi is expressed in the chart normalized at p.
inline GaussianPoint exp_map_from(const GaussianPoint & p, const TangentN & xi, double t)
{
  return apply(inverse(normalize_to_identity(p)), exp_map(xi, t));
}

// --- trajectories -------------------------------------------------------------

struct GeodesicTrajectory
{
  std::vector<double> ts;
  std::vector<GaussianPoint> points;
  TangentN source;
  GaussianPoint basepoint;
};

/// count+1 equally spaced samples of [t0, t1].
inline std::vector<double> uniform_grid(double t0, double t1, std::size_t intervals)
{
  if (intervals == 0) {
    throw InputError("uniform_grid: need at least one interval");
  }
  std::vector<double> ts(intervals + 1);
  const double step = (t1 - t0) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    ts[i] = t0 + step * static_cast<double>(i);
  }
  ts.back() = t1;
  return ts;
}

inline GeodesicTrajectory sample_geodesic(const GaussianPoint & basepoint, const TangentN & xi, std::vector<double> ts)
{
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] > ts[i - 1])) {
      throw InputError("sample_geodesic: times must be strictly increasing");
    }
  }
  const auto back = inverse(normalize_to_identity(basepoint));
  std::vector<GaussianPoint> points;
  points.reserve(ts.size());
  for (double t : ts) {
    points.push_back(apply(back, exp_map(xi, t)));
  }
  return {std::move(ts), std::move(points), xi, basepoint};
}

namespace detail {

/// Number of leading samples lying on the uniform grid ts[0] + i * (ts[1] - ts[0]).
inline std::size_t uniform_prefix(const std::vector<double> & ts)
{
  if (ts.size() < 2) {
    return ts.size();
  }
  const double spacing = ts[1] - ts[0];
  const double slack = 1e-9 * std::max(1.0, std::abs(ts.back() - ts.front()));
  std::size_t count = 2;
  while (count < ts.size() &&
         std::abs(ts[count] - (ts[0] + spacing * static_cast<double>(count))) <= slack) {
    ++count;
  }
  return count;
}

/// Sample stride k with k * spacing == h on the uniform prefix of ts.
inline std::size_t finite_difference_stride(const std::vector<double> & ts, double h)
{
  if (!(h > 0.0)) {
    throw InputError("finite-difference step must be positive");
  }
  if (ts.size() < 3) {
    throw InputError("need at least three samples for central differences");
  }
  const double spacing = ts[1] - ts[0];
  if (!(spacing > 0.0)) {
    throw InputError("sample times must be increasing");
  }
  if (spacing > h * (1.0 + 1e-9)) {
    throw InputError("grid too coarse relative to h (spacing " + std::to_string(spacing) + " > h " +
                     std::to_string(h) + ")");
  }
  const auto k = static_cast<std::size_t>(std::llround(h / spacing));
  if (std::abs(static_cast<double>(k) * spacing - h) > 1e-6 * h) {
    throw InputError("h must be an integer multiple of the sample spacing");
  }
  if (2 * k >= uniform_prefix(ts)) {
    throw InputError("trajectory too short for step h");
  }
  return k;
}

}  // namespace detail

/**
 * Largest residual of the geodesic equations
 *   Sigma'' + mu' mu'^T - Sigma' Sigma^{-1} Sigma' = 0,
 *   mu'' - Sigma' Sigma^{-1} mu' = 0,
 * along the stored samples, by central differences with step h.
 */
inline double geodesic_residual(const GeodesicTrajectory & traj, double h)
{
  const std::size_t k = detail::finite_difference_stride(traj.ts, h);
  const std::size_t count = detail::uniform_prefix(traj.ts);
  double worst = 0.0;
  for (std::size_t i = k; i + k < count; ++i) {
    const auto & lo = traj.points[i - k];
    const auto & mid = traj.points[i];
    const auto & hi = traj.points[i + k];
    const Matrix ds = (hi.sigma().matrix() - lo.sigma().matrix()) / (2.0 * h);
    const Matrix dds = (hi.sigma().matrix() - 2.0 * mid.sigma().matrix() + lo.sigma().matrix()) / (h * h);
    const Vector dm = (hi.mu() - lo.mu()) / (2.0 * h);
    const Vector ddm = (hi.mu() - 2.0 * mid.mu() + lo.mu()) / (h * h);
    Eigen::LLT<Matrix> llt(mid.sigma().matrix());
    const double r_sigma = (dds + dm * dm.transpose() - ds * llt.solve(ds)).norm();
    const double r_mu = (ddm - ds * llt.solve(dm)).norm();
    worst = std::max(worst, r_sigma + r_mu);
  }
  return worst;
}

struct FirstIntegrals
{
  double max_drift_a = 0.0;  // max |Sigma^{-1} mu' - a_ref|
  double max_drift_A = 0.0;  // max |Sigma^{-1} Sigma' + a mu^T - A_ref|_F
  Vector a_ref;              // values at the first sample with a central stencil
  Matrix A_ref;
};

/// Conserved quantities a = Sigma^{-1} mu' and A = Sigma^{-1} Sigma' + a mu^T along the samples.
inline FirstIntegrals first_integrals(const GeodesicTrajectory & traj, double h)
{
  const std::size_t k = detail::finite_difference_stride(traj.ts, h);
  const std::size_t count = detail::uniform_prefix(traj.ts);
  FirstIntegrals out;
  for (std::size_t i = k; i + k < count; ++i) {
    const auto & lo = traj.points[i - k];
    const auto & mid = traj.points[i];
    const auto & hi = traj.points[i + k];
    const Matrix ds = (hi.sigma().matrix() - lo.sigma().matrix()) / (2.0 * h);
    const Vector dm = (hi.mu() - lo.mu()) / (2.0 * h);
    Eigen::LLT<Matrix> llt(mid.sigma().matrix());
    const Vector a = llt.solve(dm);
    const Matrix big_a = llt.solve(ds) + a * mid.mu().transpose();
    if (i == k) {
      out.a_ref = a;
      out.A_ref = big_a;
      continue;
    }
    out.max_drift_a = std::max(out.max_drift_a, (a - out.a_ref).norm());
    out.max_drift_A = std::max(out.max_drift_A, (big_a - out.A_ref).norm());
  }
  return out;
}

// --- log map by shooting ------------------------------------------------------

struct LogMapOptions
{
  double tol = 1e-12;      // relative to max(1, |embed(q')|_F) in the chart normalized at p
  int max_iter = 100;      // Gauss-Newton iterations per solve
  double init_scale = 1.0;
  double fd_step = 1e-6;   // central-difference Jacobian step
  bool continuation = true;
  int max_stages = 64;     // largest number of continuation stages tried
};

struct LogMapResult
{
  TangentN xi;
  double residual = 0.0;  // relative, in the normalized chart
  int iterations = 0;
  int stages = 1;
};

namespace detail {

/// Upper triangle of theta followed by delta, read from an embedded (n+1)-matrix.
inline Vector head_coordinates(const Matrix & h)
{
  const Index n = h.rows() - 1;
  Vector c(tangent_dimension(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      c(k++) = h(i, j);
    }
  }
  c.tail(n) = h.col(n).head(n);
  return c;
}

/// Leading (n+1)-block of exp(V(xi)); unchecked, may contain non-finite values for huge xi.
inline Matrix lifted_head(const TangentN & xi)
{
  const auto e = sym_eigen(build_V(xi).matrix());
  const Matrix g = spectral_apply(e, [](double x) { return std::exp(x); });
  return g.topLeftCorner(xi.dim() + 1, xi.dim() + 1);
}

class Shooter
{
public:
  Shooter(Index n, Vector target, double scale, const LogMapOptions & opts)
      : n_(n), target_(std::move(target)), scale_(scale), opts_(opts)
  {}

  Vector residual(const Vector & x) const
  {
    return head_coordinates(lifted_head(tangent_from_coordinates(x, n_))) - target_;
  }

  LogMapResult solve(Vector x) const
  {
    Vector f = residual(x);
    double r = f.allFinite() ? f.norm() : std::numeric_limits<double>::infinity();
    if (!std::isfinite(r)) {
      throw NonConvergence("log_map: initial guess overflows", r);
    }
    const Index d = x.size();
    for (int it = 0; it <= opts_.max_iter; ++it) {
      if (r <= opts_.tol * scale_) {
        return {tangent_from_coordinates(x, n_), r / scale_, it, 1};
      }
      if (it == opts_.max_iter) {
        break;
      }
      Matrix jac(d, d);
      for (Index j = 0; j < d; ++j) {
        const double step = opts_.fd_step * std::max(1.0, std::abs(x(j)));
        Vector xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * step);
      }
      const Vector dx = jac.colPivHouseholderQr().solve(-f);
      double lambda = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 40 && !accepted; ++halving, lambda *= 0.5) {
        const Vector xn = x + lambda * dx;
        const Vector fn = residual(xn);
        if (fn.allFinite() && fn.norm() < r) {
          x = xn;
          f = fn;
          r = fn.norm();
          accepted = true;
        }
      }
      if (!accepted) {
        throw NonConvergence("log_map: line search stalled", r / scale_);
      }
    }
    throw NonConvergence("log_map: iteration limit reached", r / scale_);
  }

private:
  Index n_;
  Vector target_;
  double scale_;
  LogMapOptions opts_;
};

}  // namespace detail

/**
 * Solves exp_map_from(p, xi, 1) = q for xi (chart normalized at p) by damped
 * Gauss-Newton shooting with a central-difference Jacobian. If the direct
 * solve fails, the target is moved from p to q along
 * s -> (exp(s log Sigma_q'), s mu_q') in 2, 4, 8, ... stages, each warm
 * started from the previous solution. Returns the solution found from the
 * initial guess; global minimality is not checked.
 */
inline LogMapResult shoot(const GaussianPoint & p, const GaussianPoint & q, const LogMapOptions & opts = {})
{
  if (p.dim() != q.dim()) {
    throw InputError("log_map: points have different dimensions");
  }
  const Index n = p.dim();
  const GaussianPoint qn = apply(normalize_to_identity(p), q);
  const Matrix hq = embed(qn).matrix();
  const double scale = std::max(1.0, hq.norm());
  if ((hq - Matrix::Identity(n + 1, n + 1)).norm() <= opts.tol * scale) {
    return {TangentN::zero(n), 0.0, 0, 1};
  }
  const SymMatrix log_sigma = sym_log(qn.sigma());
  const Vector guess = opts.init_scale * tangent_coordinates(TangentN{log_sigma, qn.mu()});

  const detail::Shooter direct(n, detail::head_coordinates(hq), scale, opts);
  try {
    return direct.solve(guess);
  } catch (const NonConvergence &) {
    if (!opts.continuation) {
      throw;
    }
  }

  double last = std::numeric_limits<double>::infinity();
  for (int stages = 2; stages <= opts.max_stages; stages *= 2) {
    try {
      Vector x = Vector::Zero(tangent_dimension(n));
      LogMapResult res;
      int iterations = 0;
      for (int s = 1; s <= stages; ++s) {
        const double frac = static_cast<double>(s) / stages;
        const GaussianPoint target(sym_exp(frac * log_sigma), frac * qn.mu());
        const Matrix ht = embed(target).matrix();
        const detail::Shooter stage(n, detail::head_coordinates(ht), std::max(1.0, ht.norm()), opts);
        res = stage.solve(s == 1 ? Vector(guess / stages) : Vector(x * frac / (frac - 1.0 / stages)));
        x = tangent_coordinates(res.xi);
        iterations += res.iterations;
      }
      res.iterations = iterations;
      res.stages = stages;
      return res;
    } catch (const NonConvergence & e) {
      last = e.last_residual();
    }
  }
  throw NonConvergence("log_map: shooting failed after continuation", last);
}

inline TangentN log_map(const GaussianPoint & p, const GaussianPoint & q, const LogMapOptions & opts = {})
{
  return shoot(p, q, opts).xi;
}

/// Length of the shot geodesic from p to q.
inline double distance(const GaussianPoint & p, const GaussianPoint & q,
                       MetricConvention convention = MetricConvention::paper, const LogMapOptions & opts = {})
{
  return tangent_norm(log_map(p, q, opts), convention);
}

}  // namespace gaussgeo

#endif  // GAUSSGEO_GEODESIC_HPP
