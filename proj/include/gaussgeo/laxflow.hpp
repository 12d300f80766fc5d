#ifndef GAUSSGEO_LAXFLOW_HPP
#define GAUSSGEO_LAXFLOW_HPP

// Toda-type Lax pair on so(n+1, n) generated by the horizontal geodesic:
//   L = [[-Q, r, 0], [a0^T, 0, -r^T], [0, -a0, Q^T]],
//   M = [[-Q, 0, 0], [a0^T, 0, 0],    [0, -a0, Q^T]],   L' = [L, M].

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/geodesic.hpp"
#include "gaussgeo/manifold.hpp"
#include "gaussgeo/matcore.hpp"
#include "gaussgeo/sympair.hpp"

namespace gaussgeo {

struct LaxState
{
  Matrix q;  // general n x n
  Vector r;

  static LaxState initial(const TangentN & xi) { return {xi.dsigma.matrix(), xi.dmu}; }

  bool all_finite() const { return q.allFinite() && r.allFinite(); }

  friend LaxState operator+(const LaxState & a, const LaxState & b) { return {a.q + b.q, a.r + b.r}; }
  friend LaxState operator*(double s, const LaxState & a) { return {s * a.q, s * a.r}; }
};

/// Q' = -r a0^T,  r' = Q r.
inline LaxState rhs_v1(const LaxState & s, const Vector & a0) { return {-s.r * a0.transpose(), s.q * s.r}; }

/// 2 Q' = Q^2 - A0^2 - 2 a0 a0^T,  r' = Q r.
inline LaxState rhs_v2(const LaxState & s, const SymMatrix & big_a0, const Vector & a0)
{
  const Matrix & a = big_a0.matrix();
  return {0.5 * (s.q * s.q - a * a - 2.0 * a0 * a0.transpose()), s.q * s.r};
}

enum class LaxForm
{
  v1,
  v2,
};

struct LaxTrajectory
{
  std::vector<double> ts;
  std::vector<LaxState> states;
  TangentN source;
};

/**
 * Classical RK4 with fixed step dt from (Q, r) = (A0, a0). Samples are taken
 * at every step; the final sample is at t_end exactly (shorter last step if
 * dt does not divide t_end). Throws NumericalError on non-finite state.
 */
inline LaxTrajectory integrate(LaxForm form, const TangentN & xi, double t_end, double dt)
{
  if (!(dt > 0.0) || !(t_end >= 0.0)) {
    throw InputError("integrate: need dt > 0 and t_end >= 0");
  }
  const Vector a0 = xi.dmu;
  auto rhs = [&](const LaxState & s) {
    return form == LaxForm::v1 ? rhs_v1(s, a0) : rhs_v2(s, xi.dsigma, a0);
  };

  const double ratio = t_end / dt;
  auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  const bool partial = t_end - static_cast<double>(full) * dt > 1e-12 * std::max(1.0, t_end);

  LaxTrajectory out;
  out.source = xi;
  out.ts.reserve(full + 2);
  out.states.reserve(full + 2);
  out.ts.push_back(0.0);
  out.states.push_back(LaxState::initial(xi));

  const std::size_t steps = full + (partial ? 1 : 0);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t_prev = out.ts.back();
    const double t_next = (i == steps) ? t_end : dt * static_cast<double>(i);
    const double step = t_next - t_prev;
    const LaxState & y = out.states.back();
    const LaxState k1 = rhs(y);
    const LaxState k2 = rhs(y + (0.5 * step) * k1);
    const LaxState k3 = rhs(y + (0.5 * step) * k2);
    const LaxState k4 = rhs(y + step * k3);
    LaxState next = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.all_finite()) {
      throw NumericalError("integrate: Lax flow blew up at t=" + std::to_string(t_next));
    }
    out.ts.push_back(t_next);
    out.states.push_back(std::move(next));
  }
  return out;
}

struct LaxMatrices
{
  Matrix l;
  Matrix m;
};

inline Matrix build_L(const LaxState & s, const Vector & a0)
{
  const Index n = s.r.size();
  Matrix l = Matrix::Zero(2 * n + 1, 2 * n + 1);
  l.topLeftCorner(n, n) = -s.q;
  l.block(0, n, n, 1) = s.r;
  l.block(n, 0, 1, n) = a0.transpose();
  l.block(n, n + 1, 1, n) = -s.r.transpose();
  l.block(n + 1, n, n, 1) = -a0;
  l.bottomRightCorner(n, n) = s.q.transpose();
  return l;
}

inline Matrix build_M(const LaxState & s, const Vector & a0)
{
  const Index n = s.r.size();
  Matrix m = Matrix::Zero(2 * n + 1, 2 * n + 1);
  m.topLeftCorner(n, n) = -s.q;
  m.block(n, 0, 1, n) = a0.transpose();
  m.block(n + 1, n, n, 1) = -a0;
  m.bottomRightCorner(n, n) = s.q.transpose();
  return m;
}

inline LaxMatrices assemble_lax(const LaxState & s, const Vector & a0) { return {build_L(s, a0), build_M(s, a0)}; }

/// (Q, r) read from the (1,1) and (1,2) blocks of L.
inline LaxState state_from_L(const Matrix & l)
{
  const Index n = half_order(l.rows());
  return {-l.topLeftCorner(n, n), l.block(0, n, n, 1)};
}

/**
 * Largest entry violating the Lax-matrix pattern: zero (1,3), (3,1) and
 * (2,2) blocks, constant border a0^T / -a0, and the (2,3), (3,3) blocks
 * tied to r and Q.
 */
inline double lax_pattern_defect(const Matrix & l, const Vector & a0)
{
  const LaxState s = state_from_L(l);
  return (l - build_L(s, a0)).cwiseAbs().maxCoeff();
}

inline constexpr double kClosedFormAgreementTol = 1e-10;

/**
 * L(t) = G1^{-1} V G1 where exp(tV) = G1 G2, G1 = M D, G2 = M^T from the
 * block Cholesky factorization. The second description G2 V G2^{-1} is
 * evaluated as well and must agree.
 */
inline Matrix closed_form_L(const TangentN & xi, double t)
{
  const Index n = xi.dim();
  const Matrix v = build_V(xi).matrix().matrix();
  const auto f = block_cholesky(lifted_geodesic(xi, t), n);
  const Matrix g1 = f.lower_factor();
  const Matrix g2 = f.upper_factor();
  const Matrix l = g1.partialPivLu().solve(v * g1);
  const Matrix via_g2 = g2 * v * g2.partialPivLu().inverse();
  const double mismatch = (l - via_g2).norm();
  if (mismatch > kClosedFormAgreementTol * std::max(1.0, l.norm())) {
    throw NumericalError("closed_form_L: G1 and G2 descriptions disagree by " + std::to_string(mismatch));
  }
  return l;
}

/// Tr(L^k) for k = 1..kmax.
inline Vector power_traces(const Matrix & l, Index kmax)
{
  Vector out(kmax);
  Matrix power = l;
  for (Index k = 0; k < kmax; ++k) {
    out(k) = power.trace();
    power = power * l;
  }
  return out;
}

struct LaxVerification
{
  double max_commutator_residual = 0.0;  // max |L' - [L, M]|_F
  double max_spectral_drift = 0.0;       // max |Tr(L^k) - Tr(V^k)|, k <= 2n+1
};

inline LaxVerification verify_lax(const LaxTrajectory & traj, double h)
{
  const std::size_t k = detail::finite_difference_stride(traj.ts, h);
  const std::size_t count = detail::uniform_prefix(traj.ts);
  const Vector a0 = traj.source.dmu;
  const Index kmax = 2 * a0.size() + 1;
  const Vector traces0 = power_traces(build_L(traj.states.front(), a0), kmax);

  LaxVerification out;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto lm = assemble_lax(traj.states[i], a0);
    out.max_spectral_drift =
        std::max(out.max_spectral_drift, (power_traces(lm.l, kmax) - traces0).cwiseAbs().maxCoeff());
    if (i >= k && i + k < count) {
      const Matrix dl = (build_L(traj.states[i + k], a0) - build_L(traj.states[i - k], a0)) / (2.0 * h);
      const Matrix comm = lm.l * lm.m - lm.m * lm.l;
      out.max_commutator_residual = std::max(out.max_commutator_residual, (dl - comm).norm());
    }
  }
  return out;
}

/// |y(dt) - y(dt/2)| / |y(dt/2) - y(dt/4)| at t_end; about 16 for a fourth-order method.
inline double richardson_ratio(LaxForm form, const TangentN & xi, double t_end, double dt)
{
  auto final_state = [&](double step) {
    const auto s = integrate(form, xi, t_end, step).states.back();
    Vector packed(s.q.size() + s.r.size());
    packed << s.q.reshaped(), s.r;
    return packed;
  };
  const Vector coarse = final_state(dt);
  const Vector mid = final_state(dt / 2.0);
  const Vector fine = final_state(dt / 4.0);
  return (coarse - mid).norm() / (mid - fine).norm();
}

}  // namespace gaussgeo

#endif  // GAUSSGEO_LAXFLOW_HPP
