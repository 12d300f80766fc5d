#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gaussgeo/ahm.hpp"

using namespace gaussgeo;

namespace {

SpdMatrix scalar(double x) { return SpdMatrix(Matrix::Constant(1, 1, x)); }

GaussianPoint scalar_point(double sigma, double mu)
{
  return {SpdMatrix(Matrix::Constant(1, 1, sigma)), Vector::Constant(1, mu)};
}

double point_gap(const GaussianPoint & a, const GaussianPoint & b)
{
  return (a.sigma().matrix() - b.sigma().matrix()).norm() + (a.mu() - b.mu()).norm();
}

double min_eigenvalue(const Matrix & m) { return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff(); }

Matrix random_spd(Index m, std::mt19937_64 & rng)
{
  std::normal_distribution<double> g;
  Matrix a(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      a(i, j) = g(rng);
    }
  }
  return a * a.transpose() / static_cast<double>(m) + 0.3 * Matrix::Identity(m, m);
}

}  // namespace

TEST(AhmStep, EqualPairIsFixed)
{
  std::mt19937_64 rng(1);
  const SpdMatrix p(random_spd(3, rng));
  const auto next = ahm_step({p, p, 0});
  EXPECT_LT((next.p.matrix() - p.matrix()).norm(), 1e-14);
  EXPECT_LT((next.q.matrix() - p.matrix()).norm(), 1e-13);
  EXPECT_EQ(next.iter, 1);
}

TEST(AhmStep, ScalarHandValues)
{
  const auto one = ahm_step({scalar(4.0), scalar(1.0), 0});
  EXPECT_NEAR(one.p(0, 0), 2.5, 1e-15);
  EXPECT_NEAR(one.q(0, 0), 1.6, 1e-15);
  const auto two = ahm_step(one);
  EXPECT_NEAR(two.p(0, 0), 2.05, 1e-15);
  EXPECT_NEAR(two.q(0, 0), 2.0 / (1.0 / 2.5 + 1.0 / 1.6), 1e-15);
  EXPECT_NEAR(two.q(0, 0), 1.95122, 1e-5);
}

TEST(AhmStep, GapIdentityWithNegativeSign)
{
  std::mt19937_64 rng(2);
  for (Index m : {1, 3, 5}) {
    AhmPair pair{SpdMatrix(random_spd(m, rng)), SpdMatrix(random_spd(m, rng)), 0};
    for (int k = 0; k < 3; ++k) {
      const auto next = ahm_step(pair);
      const double gap = pair.gap();
      EXPECT_LE(gap_identity_residual(pair, next), 1e-9 * gap * gap + 1e-14);
      // the new gap Q' - P' is negative semidefinite
      EXPECT_GE(min_eigenvalue(next.p.matrix() - next.q.matrix()), -1e-12 * std::max(1.0, gap));
      pair = next;
    }
  }
}

TEST(AhmMidpoint, EqualInputsReturnImmediately)
{
  const auto r = ahm_run(scalar(3.0), scalar(3.0));
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.midpoint(0, 0), 3.0);
}

TEST(AhmMidpoint, ScalarGeometricMean)
{
  const auto r = ahm_run(scalar(4.0), scalar(1.0));
  EXPECT_LE(r.iterations, 6);
  EXPECT_LT(r.gaps.back(), 1e-12);
  EXPECT_NEAR(r.midpoint(0, 0), 2.0, 1e-12);
}

TEST(AhmMidpoint, MatchesClosedFormMidpoint)
{
  std::mt19937_64 rng(3);
  for (Index m : {2, 3, 5}) {
    const SpdMatrix p(random_spd(m, rng)), q(random_spd(m, rng));
    const Matrix r0 = geometric_midpoint(p, q).matrix();
    EXPECT_LT((ahm_midpoint(p, q).matrix() - r0).norm(), 10 * 1e-12 * std::max(1.0, r0.norm()));
  }
}

TEST(AhmMidpoint, IdentityAndLiftedEndpointGivesHalfExponential)
{
  std::mt19937_64 rng(4);
  for (Index n : {1, 2, 3}) {
    const TangentN xi = random_tangent(n, 1.0, rng);
    const SymMatrix v = build_V(xi).matrix();
    const Matrix mid = ahm_midpoint(SpdMatrix::identity(2 * n + 1), sym_exp(v)).matrix();
    EXPECT_LT((mid - sym_exp(0.5 * v).matrix()).norm(), 1e-10);
  }
}

TEST(AhmMidpoint, IterationLimitRaisesNonConvergence)
{
  AhmOptions opts;
  opts.max_iter = 1;
  EXPECT_THROW(ahm_run(scalar(100.0), scalar(1.0), opts), NonConvergence);
}

TEST(AhmIterates, MonotoneInTheSpdOrder)
{
  std::mt19937_64 rng(5);
  AhmOptions opts;
  opts.keep_history = true;
  const auto r = ahm_run(SpdMatrix(random_spd(4, rng)), SpdMatrix(random_spd(4, rng)), opts);
  for (std::size_t k = 1; k + 1 < r.history.size(); ++k) {
    const auto & a = r.history[k];
    const auto & b = r.history[k + 1];
    EXPECT_GE(min_eigenvalue(b.q.matrix() - a.q.matrix()), -1e-12);
    EXPECT_GE(min_eigenvalue(b.p.matrix() - b.q.matrix()), -1e-12);
    EXPECT_GE(min_eigenvalue(a.p.matrix() - b.p.matrix()), -1e-12);
  }
}

TEST(AhmIterates, QuadraticConvergence)
{
  std::mt19937_64 rng(6);
  AhmOptions opts;
  opts.keep_history = true;
  const auto r = ahm_run(SpdMatrix(random_spd(3, rng)), SpdMatrix(random_spd(3, rng)), opts);
  for (std::size_t k = 0; k + 1 < r.history.size(); ++k) {
    const auto & a = r.history[k];
    const double gap = a.gap();
    if (gap < 1e-6) {
      break;
    }
    const Matrix sum = a.p.matrix() + a.q.matrix();
    const double c = 0.5 * spd_inverse(SpdMatrix(sum)).matrix().norm();
    EXPECT_LE(r.history[k + 1].gap(), 2.0 * c * gap * gap);
  }
}

// On a lifted pair (I, exp(V)) the iterates from k = 1 on are mirror images,
// J P_k^{-1} J = Q_k, so det P_k det Q_k = 1 while det P_k alone drifts above one.
TEST(AhmIterates, LiftedPairsAreMirrorImages)
{
  std::mt19937_64 rng(7);
  for (Index n : {1, 2, 3}) {
    const TangentN xi = random_tangent(n, 1.0, rng);
    AhmOptions opts;
    opts.keep_history = true;
    const auto r = ahm_run(SpdMatrix::identity(2 * n + 1), lifted_geodesic(xi, 1.0), opts);
    const Matrix j = j_matrix(n);
    double max_det_drift = 0.0;
    for (const auto & pair : r.history) {
      if (pair.iter > 0) {
        EXPECT_LT((j * spd_inverse(pair.p).matrix() * j - pair.q.matrix()).norm(), 1e-10);
      }
      EXPECT_NEAR(pair.p.det() * pair.q.det(), 1.0, 1e-10);
      max_det_drift = std::max(max_det_drift, std::abs(pair.p.det() - 1.0));
    }
    EXPECT_GT(max_det_drift, 1e-3);
    EXPECT_NEAR(r.midpoint.det(), 1.0, 1e-9);
    EXPECT_LE(check_special_symmetry(r.midpoint), 1e-10);
  }
}

TEST(MidpointN, SamePointIsFixed)
{
  std::mt19937_64 rng(8);
  const auto p = random_point(2, rng);
  EXPECT_LT(point_gap(midpoint_N(p, p), p), 1e-12);
}

TEST(MidpointN, ScalarFixedMean)
{
  const auto m = midpoint_N(GaussianPoint::standard(1), scalar_point(std::exp(2.0), 0.0));
  EXPECT_NEAR(m.sigma()(0, 0), std::exp(1.0), 1e-10);
  EXPECT_NEAR(m.mu()(0), 0.0, 1e-10);
}

TEST(MidpointN, CrossCheckAndEquidistance)
{
  std::mt19937_64 rng(9);
  for (Index n : {1, 2, 3}) {
    const auto p = random_point(n, rng);
    const auto q = random_point(n, rng);
    const auto rep = midpoint_report(p, q);
    EXPECT_LE(rep.cross_check, 1e-8);
    EXPECT_LE(rep.lift_symmetry, 1e-10);
    EXPECT_NEAR(distance(p, rep.midpoint), distance(rep.midpoint, q), 1e-6);
  }
}

TEST(Interpolate, DepthOneIsMidpoint)
{
  std::mt19937_64 rng(10);
  const auto p = random_point(2, rng);
  const auto q = random_point(2, rng);
  const auto pts = interpolate(p, q, 1);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(point_gap(pts.front(), p), 0.0);
  EXPECT_EQ(point_gap(pts.back(), q), 0.0);
  EXPECT_LT(point_gap(pts[1], midpoint_N(p, q)), 1e-10);
}

TEST(Interpolate, ScalarFixedMeanSamples)
{
  const auto pts = interpolate(GaussianPoint::standard(1), scalar_point(std::exp(2.0), 0.0), 2);
  ASSERT_EQ(pts.size(), 5u);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(pts[k].sigma()(0, 0), std::exp(0.5 * static_cast<double>(k)), 1e-9);
    EXPECT_NEAR(pts[k].mu()(0), 0.0, 1e-10);
  }
}

TEST(Interpolate, PointsLieOnGeodesicWithEqualSpacing)
{
  std::mt19937_64 rng(11);
  const auto p = random_point(2, rng);
  const auto q = random_point(2, rng);
  const int depth = 3;
  const auto pts = interpolate(p, q, depth);
  const auto xi = log_map(p, q);
  const double count = std::pow(2.0, depth);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_LT(point_gap(pts[k], exp_map_from(p, xi, static_cast<double>(k) / count)), 1e-7);
  }
  const double first = distance(pts[0], pts[1]);
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    EXPECT_NEAR(distance(pts[k], pts[k + 1]), first, 1e-6);
  }
}

TEST(Interpolate, RejectsDepthOutOfRange)
{
  EXPECT_THROW(interpolate(GaussianPoint::standard(1), GaussianPoint::standard(1), 0), InputError);
  EXPECT_THROW(interpolate(GaussianPoint::standard(1), GaussianPoint::standard(1), 21), InputError);
}
