#include <gtest/gtest.h>

#include <random>
#include <set>

#include "nucalab/gf.hpp"
#include "support.hpp"

using namespace nucalab;
using nucalab::testing::for_each_vector;
using nucalab::testing::naive_apply;
using nucalab::testing::random_matrix;

TEST(PrimeField, RejectsCompositeAndLargeModuli) {
  EXPECT_THROW(PrimeField(4), ContractViolation);
  EXPECT_THROW(PrimeField(1), ContractViolation);
  EXPECT_THROW(PrimeField(65537), ContractViolation);
  EXPECT_NO_THROW(PrimeField(65521));
}

TEST(PrimeField, Inverse) {
  PrimeField f(7);
  for (Scalar a = 1; a < 7; ++a) EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
  EXPECT_THROW(f.inv(0), ContractViolation);
  EXPECT_EQ(PrimeField(3).mul(2, 2), 1u);
}

TEST(Rank, Examples) {
  EXPECT_EQ(rank(Matrix::identity(2, 2)), 2u);
  EXPECT_EQ(rank(Matrix::from_rows({{0, 1, 0}, {0, 1, 1}}, 2)), 2u);
  EXPECT_EQ(rank(Matrix(3, 3, 2)), 0u);
}

TEST(KernelBasis, Examples) {
  EXPECT_TRUE(kernel_basis(Matrix::identity(3, 5)).empty());
  auto k = kernel_basis(Matrix::from_rows({{1, 1}}, 2));
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k[0], (Vec{1, 1}));
  EXPECT_EQ(kernel_basis(Matrix(1, 2, 2)).size(), 2u);
}

TEST(KernelBasis, MatchesEnumerationOfAllFourVectors) {
  // Oracle for the 1x2 example: all v in GF(2)^2 with v0 + v1 = 0.
  std::set<Vec> kernel;
  for_each_vector(2, 2, [&](const Vec& v) {
    if ((v[0] + v[1]) % 2 == 0) kernel.insert(v);
  });
  EXPECT_EQ(kernel, (std::set<Vec>{{0, 0}, {1, 1}}));
}

TEST(SolveAffine, Examples) {
  auto s1 = solve_affine(Matrix::identity(2, 2), Vec{1, 0});
  ASSERT_TRUE(s1.particular);
  EXPECT_EQ(*s1.particular, (Vec{1, 0}));
  EXPECT_TRUE(s1.kernel_basis.empty());

  auto s2 = solve_affine(Matrix::from_rows({{1, 1}}, 2), Vec{1});
  ASSERT_TRUE(s2.particular);
  EXPECT_EQ(*s2.particular, (Vec{1, 0}));
  ASSERT_EQ(s2.kernel_basis.size(), 1u);
  EXPECT_EQ(s2.kernel_basis[0], (Vec{1, 1}));

  EXPECT_FALSE(solve_affine(Matrix(1, 1, 2), Vec{1}).particular);
  EXPECT_THROW(solve_affine(Matrix(2, 1, 2), Vec{1}), ContractViolation);
}

TEST(Transpose, Examples) {
  EXPECT_EQ(transpose(Matrix::identity(3, 3)), Matrix::identity(3, 3));
  EXPECT_EQ(transpose(Matrix::from_rows({{1, 0}}, 2)), Matrix::from_rows({{1}, {0}}, 2));
}

class GfProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{nucalab::testing::seed_from_env()};
};

TEST_F(GfProperty, TransposeIsAnInvolutionAndPreservesRank) {
  for (int i = 0; i < 200; ++i) {
    std::uint32_t p = std::vector<std::uint32_t>{2, 3, 5, 7, 65521}[i % 5];
    auto m = random_matrix(1 + rng() % 7, 1 + rng() % 7, p, rng);
    EXPECT_EQ(transpose(transpose(m)), m);
    EXPECT_EQ(rank(m), rank(transpose(m)));
  }
}

TEST_F(GfProperty, SolveAffineAgreesWithExhaustiveEnumerationOverGF2) {
  for (int i = 0; i < 60; ++i) {
    std::size_t cols = 1 + rng() % 12;
    std::size_t rows = 1 + rng() % 6;
    auto a = random_matrix(rows, cols, 2, rng);
    Vec b(rows);
    for (auto& e : b) e = rng() % 2;

    std::size_t n_solutions = 0, n_kernel = 0;
    for_each_vector(cols, 2, [&](const Vec& x) {
      auto y = naive_apply(a, x);
      if (y == b) ++n_solutions;
      if (is_zero(y)) ++n_kernel;
    });

    auto sol = solve_affine(a, b);
    EXPECT_EQ(sol.particular.has_value(), n_solutions > 0);
    if (sol.particular) {
      EXPECT_EQ(naive_apply(a, *sol.particular), b);
    }
    EXPECT_EQ(std::size_t(1) << sol.kernel_basis.size(), n_kernel);
    for (const auto& v : sol.kernel_basis) EXPECT_TRUE(is_zero(naive_apply(a, v)));
    if (n_solutions) {
      EXPECT_EQ(n_solutions, n_kernel);
    }
  }
}

TEST_F(GfProperty, KernelBasisIsIndependentAndDeterministic) {
  for (int i = 0; i < 100; ++i) {
    auto a = random_matrix(1 + rng() % 6, 1 + rng() % 8, 3, rng);
    auto k1 = kernel_basis(a);
    EXPECT_EQ(k1, kernel_basis(a));
    EXPECT_EQ(k1.size() + rank(a), a.cols());
    if (k1.empty()) continue;
    Matrix stacked(k1.size(), a.cols(), 3);
    for (std::size_t r = 0; r < k1.size(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) stacked.set(r, c, k1[r][c]);
    EXPECT_EQ(rank(stacked), k1.size());
  }
}

TEST_F(GfProperty, RankOfProductIsBounded) {
  for (int i = 0; i < 100; ++i) {
    auto a = random_matrix(4, 5, 5, rng);
    auto b = random_matrix(5, 3, 5, rng);
    EXPECT_LE(rank(a * b), std::min(rank(a), rank(b)));
  }
}
