#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gaussgeo/manifold.hpp"
#include "gaussgeo/matcore.hpp"
#include "gaussgeo/sympair.hpp"
#include "oracles.hpp"

using namespace gaussgeo;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows)
{
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto & row : rows) {
    Index j = 0;
    for (double x : row) {
      m(i, j++) = x;
    }
    ++i;
  }
  return m;
}

Matrix random_spd(Index m, std::mt19937_64 & rng)
{
  std::normal_distribution<double> g;
  Matrix a(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      a(i, j) = g(rng);
    }
  }
  return a * a.transpose() + 0.5 * Matrix::Identity(m, m);
}

}  // namespace

TEST(SymMatrix, StorageIsExactlySymmetric)
{
  const SymMatrix s(mat({{1, 2}, {2.5, 3}}));
  EXPECT_EQ(s(0, 1), s(1, 0));
  EXPECT_DOUBLE_EQ(s(0, 1), 2.25);
}

TEST(SymMatrix, CheckedRejectsAsymmetricInput)
{
  EXPECT_THROW(SymMatrix::checked(mat({{1, 2}, {2.1, 3}})), InputError);
  EXPECT_NO_THROW(SymMatrix::checked(mat({{1, 2}, {2 + 1e-14, 3}})));
}

TEST(SpdMatrix, RejectsIndefinite)
{
  EXPECT_THROW(SpdMatrix(mat({{1, 2}, {2, 1}})), NotPositiveDefinite);
  EXPECT_NO_THROW(SpdMatrix(mat({{2, 1}, {1, 2}})));
}

TEST(SymEigen, IdentityReconstructs)
{
  const auto e = sym_eigen(SymMatrix::identity(3));
  EXPECT_LT((e.values - Vector::Ones(3)).norm(), 1e-15);
  EXPECT_LT((e.frame * e.values.asDiagonal() * e.frame.transpose() - Matrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((e.frame.transpose() * e.frame - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(SymEigen, DiagonalInputSortedAscending)
{
  const auto e = sym_eigen(SymMatrix(mat({{2, 0}, {0, -1}})));
  EXPECT_NEAR(e.values(0), -1.0, 1e-15);
  EXPECT_NEAR(e.values(1), 2.0, 1e-15);
}

TEST(SymEigen, SwapMatrixHasEigenvaluesPlusMinusOne)
{
  const auto e = sym_eigen(SymMatrix(mat({{0, 1}, {1, 0}})));
  EXPECT_NEAR(e.values(0), -1.0, 1e-15);
  EXPECT_NEAR(e.values(1), 1.0, 1e-15);
}

TEST(SymEigen, RandomReconstructionWithinTolerance)
{
  std::mt19937_64 rng(11);
  for (Index m : {2, 3, 5, 7}) {
    const Matrix s = random_spd(m, rng) - 2.0 * Matrix::Identity(m, m);
    const auto e = sym_eigen(SymMatrix(s));
    const Matrix back = e.frame * e.values.asDiagonal() * e.frame.transpose();
    EXPECT_LT((back - s).norm(), tolerance::eigen * s.norm());
    EXPECT_LT((e.frame.transpose() * e.frame - Matrix::Identity(m, m)).norm(), tolerance::eigen * m);
  }
}

TEST(SymExp, ZeroGivesIdentity)
{
  EXPECT_EQ(sym_exp(SymMatrix::zero(3)).matrix(), Matrix::Identity(3, 3));
}

TEST(SymExp, DiagonalCase)
{
  const Matrix e = sym_exp(SymMatrix(mat({{1, 0}, {0, -1}}))).matrix();
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(e(0, 1), 0.0, 1e-15);
}

TEST(SymExp, SwapMatrixGivesHyperbolicFunctions)
{
  const Matrix e = sym_exp(SymMatrix(mat({{0, 1}, {1, 0}}))).matrix();
  EXPECT_NEAR(e(0, 0), std::cosh(1.0), 1e-14);
  EXPECT_NEAR(e(0, 1), std::sinh(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), std::cosh(1.0), 1e-14);
}

TEST(SymExp, InverseAndTaylorOracle)
{
  std::mt19937_64 rng(3);
  for (Index m : {2, 3, 5}) {
    const Matrix s = 0.3 * (random_spd(m, rng) - 2.0 * Matrix::Identity(m, m));
    const Matrix e = sym_exp(SymMatrix(s)).matrix();
    const Matrix em = sym_exp(SymMatrix(Matrix(-s))).matrix();
    EXPECT_LT((e * em - Matrix::Identity(m, m)).norm(), 1e-12);
    EXPECT_LT((e - oracle::taylor_exp(s)).norm(), 1e-12 * e.norm());
  }
}

TEST(SymExp, CommutingSumFactorizes)
{
  const Matrix q = mat({{0.6, -0.8}, {0.8, 0.6}});
  const Matrix s1 = q * mat({{0.7, 0}, {0, -0.2}}) * q.transpose();
  const Matrix s2 = q * mat({{-1.1, 0}, {0, 0.4}}) * q.transpose();
  const Matrix lhs = sym_exp(SymMatrix(Matrix(s1 + s2))).matrix();
  const Matrix rhs = sym_exp(SymMatrix(s1)).matrix() * sym_exp(SymMatrix(s2)).matrix();
  EXPECT_LT((lhs - rhs).norm(), 1e-13);
}

TEST(SymExp, DeterminantIsExpTrace)
{
  std::mt19937_64 rng(5);
  for (Index m : {2, 3, 5}) {
    const Matrix s = 0.2 * (random_spd(m, rng) - 3.0 * Matrix::Identity(m, m));
    const double det = sym_exp(SymMatrix(s)).det();
    EXPECT_NEAR(det / std::exp(s.trace()), 1.0, 1e-10);
  }
}

TEST(SpdSqrt, IdentityAndDiagonal)
{
  EXPECT_LT((spd_sqrt(SpdMatrix::identity(3)).matrix() - Matrix::Identity(3, 3)).norm(), 1e-15);
  const Matrix r = spd_sqrt(SpdMatrix(mat({{4, 0}, {0, 9}}))).matrix();
  EXPECT_NEAR(r(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(r(1, 1), 3.0, 1e-15);
}

TEST(SpdSqrt, SquareReproducesInput)
{
  const Matrix p = mat({{2, 1}, {1, 2}});
  const Matrix r = spd_sqrt(SpdMatrix(p)).matrix();
  EXPECT_LT((r * r - p).norm(), 1e-12);
  EXPECT_LT((spd_inv_sqrt(SpdMatrix(p)).matrix() * r - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(SpdInverse, MatchesHandInverse)
{
  const Matrix inv = spd_inverse(SpdMatrix(mat({{3, -1}, {-1, 1}}))).matrix();
  EXPECT_LT((inv - mat({{0.5, 0.5}, {0.5, 1.5}})).norm(), 1e-15);
}

TEST(HalfOrder, RejectsEvenOrders)
{
  EXPECT_EQ(half_order(5), 2);
  EXPECT_THROW(half_order(4), InputError);
  EXPECT_THROW(half_order(1), InputError);
}

TEST(JMatrix, SquaresToIdentity)
{
  for (Index n : {1, 2, 4}) {
    const Matrix j = j_matrix(n);
    EXPECT_EQ(j * j, Matrix::Identity(2 * n + 1, 2 * n + 1));
  }
}

TEST(BlockCholesky, IdentityGivesIdentityFactors)
{
  for (Index n : {1, 2, 3}) {
    const auto f = block_cholesky(SpdMatrix::identity(2 * n + 1), n);
    EXPECT_EQ(f.m.dense(), Matrix::Identity(2 * n + 1, 2 * n + 1));
    EXPECT_EQ(f.d.dense(), Matrix::Identity(2 * n + 1, 2 * n + 1));
  }
}

TEST(BlockCholesky, BlockDiagonalInputIsItsOwnD)
{
  const Matrix g = Vector(Eigen::Vector3d(std::exp(-1.0), 1.0, std::exp(1.0))).asDiagonal();
  const auto f = block_cholesky(SpdMatrix(g), 1);
  EXPECT_EQ(f.m.dense(), Matrix::Identity(3, 3));
  EXPECT_LT((f.d.dense() - g).norm(), 1e-15);
}

TEST(BlockCholesky, MatchesScalarEliminationOracle)
{
  std::mt19937_64 rng(17);
  for (Index n : {1, 2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix g = random_spd(2 * n + 1, rng);
      const auto f = block_cholesky(SpdMatrix(g), n);
      const auto ref = oracle::block_ldl(g, n);
      EXPECT_LT((f.reconstruct() - g).norm(), tolerance::cholesky * g.norm());
      EXPECT_LT((f.m.dense() - ref.m).norm(), 1e-10);
      EXPECT_LT((f.d.dense() - ref.d).norm(), 1e-10 * g.norm());
    }
  }
}

TEST(BlockCholesky, ReportsFailingPivotBlock)
{
  // Symmetric with a non-positive middle pivot: cannot be constructed as SpdMatrix,
  // so the failure is caught before factorization.
  EXPECT_THROW(SpdMatrix(mat({{1, 0, 0}, {0, -1, 0}, {0, 0, 1}})), NotPositiveDefinite);
  EXPECT_THROW(block_cholesky(SpdMatrix::identity(5), 1), InputError);
}

TEST(BlockCholesky, SpecialStructureOnLiftedGeodesic)
{
  std::mt19937_64 rng(23);
  for (Index n : {1, 2, 3, 5}) {
    const TangentN xi = random_tangent(n, 0.8, rng);
    const SpdMatrix g = sym_exp(build_V(xi).matrix());
    const auto s = special_structure(block_cholesky(g, n));
    EXPECT_LT(s.d22_deviation, 1e-10);
    EXPECT_LT(s.d33_deviation, 1e-10);
    EXPECT_LT(s.m32_deviation, 1e-10);
    EXPECT_LT(s.m31_relation, 1e-10);
  }
}

TEST(CheckSpecialSymmetry, IdentityAndLiftedPoints)
{
  EXPECT_LT(check_special_symmetry(SpdMatrix::identity(5)), 1e-15);
  std::mt19937_64 rng(29);
  const TangentN xi = random_tangent(2, 1.0, rng);
  EXPECT_LE(check_special_symmetry(sym_exp(build_V(xi).matrix())), 1e-12);
}

TEST(CheckSpecialSymmetry, NonMemberHasPositiveResidual)
{
  const double r = check_special_symmetry(SpdMatrix(mat({{2, 0, 0}, {0, 1, 0}, {0, 0, 1}})));
  EXPECT_NEAR(r, std::sqrt(1.25), 1e-15);  // J G^{-1} J - G = diag(-1, 0, -0.5)
}

TEST(SpecialSpd, ChecksDeterminant)
{
  EXPECT_NO_THROW(SpecialSpd::checked(SpdMatrix::identity(3)));
  EXPECT_THROW(SpecialSpd::checked(SpdMatrix(mat({{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}))), InputError);
}
