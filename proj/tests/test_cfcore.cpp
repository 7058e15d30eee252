#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "modwind/cfcore.hpp"

using namespace modwind;

namespace {

// Independent oracle: plain int64 product of (a 1; 1 0) factors.
std::array<long, 4> naive_product(const Word& w) {
  std::array<long, 4> m{1, 0, 0, 1};
  for (Digit a : w) {
    m = {m[0] * a + m[1], m[0], m[2] * a + m[3], m[2]};
  }
  return m;
}

// Backward evaluation a1 + 1/(a2 + ...) in exact rationals.
Rational naive_value(const Word& w) {
  Rational x = w.back();
  for (std::size_t i = w.size() - 1; i-- > 0;) x = Rational(w[i]) + 1 / x;
  return x;
}

Word random_word(std::mt19937_64& rng, int A, std::size_t n) {
  std::uniform_int_distribution<int> d(1, A);
  Word w(n);
  for (auto& x : w) x = static_cast<Digit>(d(rng));
  return w;
}

}  // namespace

TEST(CfEvalFinite, Examples) {
  EXPECT_EQ(cf_eval_finite(Word{3, 2}), Rational(7, 2));
  EXPECT_EQ(cf_eval_finite(Word{1}), Rational(1));
  EXPECT_EQ(cf_eval_finite(Word{3, 2, 3, 4}), Rational(103, 30));
}

TEST(CfEvalFinite, RejectsBadInput) {
  EXPECT_THROW(cf_eval_finite(Word{}), DomainError);
  EXPECT_THROW(cf_eval_finite(Word{2, 0, 1}), DomainError);
}

TEST(CfEvalFinite, AgreesWithBackwardEvaluation) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const Word w = random_word(rng, 9, 1 + trial % 14);
    ASSERT_EQ(cf_eval_finite(w), naive_value(w));
  }
}

TEST(Convergent, Examples) {
  EXPECT_EQ(convergent(Word{3, 2, 3, 4}, 1), Rational(3));
  EXPECT_EQ(convergent(Word{3, 2, 3, 4}, 4), Rational(103, 30));
  EXPECT_EQ(convergent(Word{1, 1, 1}, 2), Rational(2));
  EXPECT_THROW(convergent(Word{1, 2}, 0), DomainError);
  EXPECT_THROW(convergent(Word{1, 2}, 3), DomainError);
}

TEST(CfExpand, RoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Word w = random_word(rng, 7, 1 + trial % 10);
    // the expansion of a rational is unique once the last digit is > 1
    if (w.size() > 1 && w.back() == 1) w[w.size() - 1] = 2;
    ASSERT_EQ(cf_expand(cf_eval_finite(w)), w);
  }
  EXPECT_EQ(cf_expand(Rational(103, 30)), (Word{3, 2, 3, 4}));
  EXPECT_THROW(cf_expand(Rational(1, 2)), DomainError);
}

TEST(MatrixOfWord, Examples) {
  EXPECT_EQ(matrix_of_word(Word{3, 2, 3, 4}), (MatrixZ{103, 24, 30, 7}));
  EXPECT_EQ(matrix_of_word(Word{1, 1}), (MatrixZ{2, 1, 1, 1}));
  EXPECT_EQ(matrix_of_word(Word{5}), (MatrixZ{5, 1, 1, 0}));
}

TEST(MatrixOfWord, MatchesNaiveProductAndDeterminant) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Word w = random_word(rng, 5, 1 + trial % 12);
    const MatrixZ m = matrix_of_word(w);
    const auto ref = naive_product(w);
    ASSERT_EQ(m.a, ref[0]);
    ASSERT_EQ(m.b, ref[1]);
    ASSERT_EQ(m.c, ref[2]);
    ASSERT_EQ(m.d, ref[3]);
    ASSERT_EQ(m.determinant(), w.size() % 2 ? -1 : 1);
    // first column is the numerator and denominator of the convergent
    ASSERT_EQ(Rational(m.a, m.c), cf_eval_finite(w));
  }
}

TEST(FixedPoints, Examples) {
  const auto [w, wp] = fixed_points(MatrixZ{103, 24, 30, 7});
  EXPECT_EQ(w, QuadraticSurd(8, 1, 84, 5));
  EXPECT_EQ(wp, QuadraticSurd(8, -1, 84, 5));
  // (96 + sqrt(12096)) / 60 is the same number
  EXPECT_EQ(w, QuadraticSurd(96, 1, 12096, 60));
  EXPECT_NEAR(w.value().to_double(), (8 + std::sqrt(84.0)) / 5, 1e-15);

  const auto [g, gp] = fixed_points(MatrixZ{2, 1, 1, 1});
  EXPECT_EQ(g, QuadraticSurd(1, 1, 5, 2));
  EXPECT_EQ(gp, QuadraticSurd(1, -1, 5, 2));

  EXPECT_THROW(fixed_points(MatrixZ{2, 0, 0, 1}), DomainError);
  EXPECT_THROW(fixed_points(MatrixZ{1, 1, 0, 1}), DomainError);
}

TEST(FixedPoints, SatisfyTheQuadratic) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Word w = random_word(rng, 6, 2 * (1 + trial % 5));
    const MatrixZ m = matrix_of_word(w);
    const auto [x, xp] = fixed_points(m);
    for (const auto& root : {x, xp}) {
      const Real v = root.value(200);
      const double residual = (Real(m.c, 200) * v * v + Real(mpz_class(m.d - m.a), 200) * v - Real(m.b, 200)).to_double();
      ASSERT_LT(std::abs(residual), 1e-40);
    }
    ASSERT_GT(x.value().to_double(), xp.value().to_double());
  }
}

TEST(QuadraticSurd, Canonicalization) {
  EXPECT_EQ(QuadraticSurd(2, 2, 8, 2), QuadraticSurd(1, 2, 2, 1));
  EXPECT_EQ(QuadraticSurd(3, 1, 4, 5), QuadraticSurd(1, 0, 1, 1));
  EXPECT_EQ(QuadraticSurd(1, 1, 5, -2), QuadraticSurd(-1, -1, 5, 2));
  EXPECT_FALSE(QuadraticSurd(1, 1, 5, 2) == QuadraticSurd(1, -1, 5, 2));
  EXPECT_THROW(QuadraticSurd(1, 1, 5, 0), DomainError);
}

TEST(PeriodicValue, Examples) {
  EXPECT_NEAR(periodic_value(Word{1, 1}).to_double(), 1.6180339887498949, 1e-15);
  EXPECT_NEAR(periodic_value(Word{3, 2, 3, 4}).to_double(), (8 + std::sqrt(84.0)) / 5, 1e-15);
  EXPECT_NEAR(periodic_value(Word{2, 2}).to_double(), 1 + std::sqrt(2.0), 1e-15);
  EXPECT_THROW(periodic_value(Word{1, 2, 3}), DomainError);
}

TEST(PeriodicValue, IsAFixedPointOfItsOwnExpansion) {
  // [a1..an, x] = x for the purely periodic value x
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Word w = random_word(rng, 5, 2 * (1 + trial % 4));
    const Real x = periodic_value(w, 200);
    Real y = x;
    for (std::size_t i = w.size(); i-- > 0;) y = Real(long(w[i]), 200) + Real(1, 200) / y;
    ASSERT_LT(std::abs((y - x).to_double()), 1e-45);
  }
}

TEST(GaussShift, Examples) {
  EXPECT_EQ(gauss_shift(Word{3, 2, 3, 4}, 1), (Word{2, 3, 4, 3}));
  EXPECT_EQ(gauss_shift(Word{3, 2, 3, 4}, 4), (Word{3, 2, 3, 4}));
  EXPECT_EQ(gauss_shift(Word{1, 2}, 3), (Word{2, 1}));
}

TEST(EigenvalueMax, Examples) {
  EXPECT_NEAR(eigenvalue_max(MatrixZ{2, 1, 1, 1}).to_double(), (3 + std::sqrt(5.0)) / 2, 1e-15);
  EXPECT_NEAR(eigenvalue_max(MatrixZ{103, 24, 30, 7}).to_double(), (110 + std::sqrt(12096.0)) / 2, 1e-12);
  EXPECT_THROW(eigenvalue_max(MatrixZ{1, 1, 0, 1}), DomainError);
}
