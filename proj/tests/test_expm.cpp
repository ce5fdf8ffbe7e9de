#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qlfiber/expm.hpp"
#include "qlfiber/types.hpp"

using namespace qlfiber;

TEST(Expm, MatchesEigendecompositionForHermitianGenerators)
{
  std::mt19937_64 rng(11);
  for (double scale : {1e-3, 0.1, 1.0, 10.0, 300.0}) {
    const CMatrix h = oracle::random_hermitian(12, rng, scale);
    const CMatrix u = expm(Complex(0.0, -1.0) * h);
    const CMatrix ref = oracle::hermitian_evolution(h, 1.0);
    EXPECT_LT((u - ref).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, scale)) << "scale " << scale;
    EXPECT_LT(unitarity_defect(u), 1e-11 * std::max(1.0, scale));
  }
}

TEST(Expm, MatchesTaylorForNonNormalMatrices)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (double scale : {0.01, 0.5, 3.0}) {
    CMatrix a(6, 6);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j) a(i, j) = scale * Complex(g(rng), g(rng));
    const CMatrix e = expm(a);
    const CMatrix ref = oracle::taylor_expm(a);
    EXPECT_LT((e - ref).norm() / ref.norm(), 1e-12) << "scale " << scale;
  }
}

TEST(Expm, RealNilpotentAndZero)
{
  RMatrix n = RMatrix::Zero(3, 3);
  n(0, 1) = 2.0;
  n(1, 2) = 3.0;
  const RMatrix e = expm(n);
  RMatrix ref = RMatrix::Identity(3, 3) + n + 0.5 * n * n;
  EXPECT_LT((e - ref).norm(), 1e-14);
  EXPECT_EQ(expm(RMatrix::Zero(4, 4)), RMatrix::Identity(4, 4));
}

TEST(Helpers, HermiticityAndKron)
{
  CMatrix h(2, 2);
  h << 1.0, Complex(0, 2), Complex(0, -2), 3.0;
  EXPECT_TRUE(is_hermitian(h, 1e-15));
  h(0, 1) += 1e-6;
  EXPECT_FALSE(is_hermitian(h, 1e-9));
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const CMatrix k = kron(x, CMatrix::Identity(2, 2));
  EXPECT_EQ(k.rows(), 4);
  EXPECT_EQ(k(0, 2), Complex(1.0));
  EXPECT_EQ(k(1, 3), Complex(1.0));
  EXPECT_EQ(k(0, 1), Complex(0.0));
}
