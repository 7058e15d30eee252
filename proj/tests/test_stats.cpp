#include <gtest/gtest.h>

#include <mpfr.h>

#include <cmath>
#include <map>
#include <random>

#include "modwind/pipeline.hpp"
#include "modwind/stats.hpp"
#include "modwind/verify.hpp"

using namespace modwind;

namespace {

// Phi(x) from the Maclaurin series of erf at 512 bits.
double phi_oracle(double x) {
  const mpfr_prec_t bits = 512;
  mpfr_t z, z2, term, sum, tmp;
  mpfr_inits2(bits, z, z2, term, sum, tmp, (mpfr_ptr)0);
  mpfr_set_d(z, x, MPFR_RNDN);
  mpfr_sqrt_ui(tmp, 2, MPFR_RNDN);
  mpfr_div(z, z, tmp, MPFR_RNDN);
  mpfr_mul(z2, z, z, MPFR_RNDN);
  mpfr_set(term, z, MPFR_RNDN);  // (-1)^n z^(2n+1) / n!
  mpfr_set(sum, z, MPFR_RNDN);
  for (unsigned long n = 1; n < 2000; ++n) {
    mpfr_mul(term, term, z2, MPFR_RNDN);
    mpfr_div_ui(term, term, n, MPFR_RNDN);
    mpfr_neg(term, term, MPFR_RNDN);
    mpfr_div_ui(tmp, term, 2 * n + 1, MPFR_RNDN);
    mpfr_add(sum, sum, tmp, MPFR_RNDN);
    if (mpfr_zero_p(tmp) || mpfr_get_exp(tmp) < mpfr_get_exp(sum) - long(bits)) break;
  }
  mpfr_const_pi(tmp, MPFR_RNDN);
  mpfr_sqrt(tmp, tmp, MPFR_RNDN);
  mpfr_div(sum, sum, tmp, MPFR_RNDN);  // erf / 2
  mpfr_add_d(sum, sum, 0.5, MPFR_RNDN);
  const double out = mpfr_get_d(sum, MPFR_RNDN);
  mpfr_clears(z, z2, term, sum, tmp, (mpfr_ptr)0);
  return out;
}

JointCounts full_run(int A, int N, HistogramConfig hist = {256, 4.0}) {
  JointCounts acc(A, N, hist);
  enumerate(A, N, [&](std::span<const Digit> rep) { acc.add(compute_invariants(rep)); });
  return acc;
}

}  // namespace

TEST(GaussianCdf, Examples) {
  EXPECT_EQ(gaussian_cdf(0.0, 2.0), 0.5);
  EXPECT_NEAR(gaussian_cdf(std::sqrt(2.0), 2.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(gaussian_cdf(1.0, 1.0), 0.841344746068543, 1e-15);
  EXPECT_EQ(gaussian_cdf(-1e300, 1.0), 0.0);
  EXPECT_EQ(gaussian_cdf(1e300, 1.0), 1.0);
  EXPECT_THROW(gaussian_cdf(0.0, 0.0), DomainError);
  EXPECT_THROW(gaussian_cdf(0.0, -1.0), DomainError);
}

TEST(GaussianCdf, MatchesSeriesOracle) {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = -8.0 + 16.0 * i / 999.0;
    worst = std::max(worst, std::abs(gaussian_cdf(x, 1.0) - phi_oracle(x)));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(GaussianCdf, SymmetryAndMonotonicity) {
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = -10.0 + i * 0.01;
    const double f = gaussian_cdf(x, 0.9);
    EXPECT_NEAR(f + gaussian_cdf(-x, 0.9), 1.0, 1e-12);
    EXPECT_GE(f, prev);
    prev = f;
  }
}

TEST(JointCounts, CellExamples) {
  JointCounts acc(5, 12);
  acc.add(compute_invariants(Word{3, 2, 3, 4}));
  EXPECT_EQ(acc.cell(4, 0, 24), 1u);
  acc.add(compute_invariants(Word{1, 1}));
  EXPECT_EQ(acc.cell(2, 0, 4), 1u);
  acc.add(compute_invariants(Word{1, 1}));
  EXPECT_EQ(acc.cell(2, 0, 4), 2u);
  EXPECT_EQ(acc.total(), 3u);
  EXPECT_EQ(acc.cells().size(), 2u);
}

TEST(JointCounts, RejectsInvalidRecords) {
  JointCounts acc(3, 4);
  EXPECT_THROW(acc.add({0, 6, 12, 1.0}), DomainError);  // period beyond N
  EXPECT_THROW(acc.add({0, 3, 12, 1.0}), DomainError);  // odd period
  EXPECT_THROW(acc.add({5, 2, 8, 1.0}), DomainError);   // |psi| too large
  EXPECT_THROW(acc.add({0, 2, 2, 1.0}), DomainError);   // lw below 2n
  EXPECT_THROW(acc.add({0, 2, 8, 0.0}), DomainError);
  EXPECT_THROW(JointCounts(3, 5), DomainError);
  EXPECT_THROW(JointCounts(3, 4, {1, 4.0}), DomainError);
}

TEST(JointCounts, MergeIdentityAndCommutativity) {
  std::mt19937_64 rng(1);
  const HistogramConfig hist{128, 3.0};
  for (int trial = 0; trial < 20; ++trial) {
    JointCounts a(3, 8, hist), b(3, 8, hist);
    for (int i = 0; i < 50; ++i) {
      const std::size_t n = 2 * (1 + rng() % 4);
      a.add(compute_invariants(sample_uniform(3, n, rng).rep()));
      b.add(compute_invariants(sample_uniform(3, (n % 8) + 2, rng).rep()));
    }
    EXPECT_TRUE(merge(a, JointCounts(3, 8, hist)) == a);
    const JointCounts ab = merge(a, b), ba = merge(b, a);
    EXPECT_EQ(ab.cells().size(), ba.cells().size());
    EXPECT_EQ(ab.bins(), ba.bins());
    EXPECT_EQ(ab.total(), 100u);
    for (std::size_t i = 0; i < ab.cells().size(); ++i) EXPECT_EQ(ab.cells()[i].count, ba.cells()[i].count);
  }
  EXPECT_THROW(JointCounts(3, 8, hist).merge(JointCounts(3, 6, hist)), DomainError);
}

TEST(JointCounts, ShardMergeEqualsSequentialPass) {
  const HistogramConfig hist{512, 4.0};
  const JointCounts single = full_run(3, 8, hist);
  JointCounts sharded(3, 8, hist);
  for (const Shard& shard : shard_cover(3, 2)) {
    JointCounts part(3, 8, hist);
    enumerate(3, 8, shard, [&](std::span<const Digit> rep) { part.add(compute_invariants(rep)); });
    sharded.merge(part);
  }
  EXPECT_EQ(single.cells().size(), sharded.cells().size());
  EXPECT_EQ(single.bins(), sharded.bins());
  EXPECT_EQ(single.total(), sharded.total());
}

TEST(JointCounts, MassIsConserved) {
  const JointCounts acc = full_run(3, 8, {16, 0.5});
  EXPECT_EQ(pi_exact(3, 8), acc.total());
  std::uint64_t cells = 0, binned = acc.underflow() + acc.overflow();
  for (const auto& c : acc.cells()) cells += c.count;
  for (auto b : acc.bins()) binned += b;
  EXPECT_EQ(cells, acc.total());
  EXPECT_EQ(binned, acc.total());
  EXPECT_GT(acc.underflow(), 0u);
}

TEST(WindingSymmetry, ExactOverAllWords) {
  for (int A = 2; A <= 3; ++A) {
    for (std::size_t n = 2; n <= 8; n += 2) {
      std::map<int, long> hist;
      oracle::for_each_word(A, n, [&](std::span<const Digit> w) { ++hist[winding(w)]; });
      for (const auto& [psi, count] : hist) EXPECT_EQ(count, hist[-psi]);
    }
  }
}

TEST(WindingSymmetry, HoldsOverNecklaces) {
  // an odd shift preserves primitivity and negates psi, so the necklace
  // marginal is symmetric too
  for (int A = 2; A <= 3; ++A) {
    const JointCounts acc = full_run(A, 8);
    std::map<std::pair<int, int>, std::uint64_t> marginal;
    for (const auto& c : acc.cells()) marginal[{c.n, c.psi}] += c.count;
    for (const auto& [key, count] : marginal) EXPECT_EQ(count, (marginal[{key.first, -key.second}]));
  }
}

TEST(EmpiricalCdf, HandComputedTwoLetterCase) {
  const JointCounts acc = full_run(2, 2);
  ASSERT_EQ(acc.total(), 4u);
  const auto cdf = empirical_cdf(acc, Normalization::period);
  ASSERT_EQ(cdf.size(), 3u);
  EXPECT_DOUBLE_EQ(cdf[0].x, -1 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(cdf[0].F, 0.25);
  EXPECT_DOUBLE_EQ(cdf[1].x, 0.0);
  EXPECT_DOUBLE_EQ(cdf[1].F, 0.75);
  EXPECT_DOUBLE_EQ(cdf[2].x, 1 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(cdf[2].F, 1.0);
}

TEST(EmpiricalCdf, SymmetricAndComplete) {
  const JointCounts acc = full_run(3, 8);
  for (Normalization norm : {Normalization::period, Normalization::maxN, Normalization::word}) {
    const auto cdf = empirical_cdf(acc, norm);
    EXPECT_DOUBLE_EQ(cdf.back().F, 1.0);
    for (std::size_t i = 1; i < cdf.size(); ++i) {
      EXPECT_LT(cdf[i - 1].x, cdf[i].x);
      EXPECT_LE(cdf[i - 1].F, cdf[i].F);
    }
    // F(-x-) = 1 - F(x)
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      const std::size_t j = cdf.size() - 1 - i;
      const double left_limit = j == 0 ? 0.0 : cdf[j - 1].F;
      EXPECT_NEAR(left_limit, 1.0 - cdf[i].F, 1e-12);
    }
  }
}

TEST(EmpiricalCdf, ExactAtomOrdering) {
  // 3/sqrt(8) and 3/sqrt(9) differ in the 2nd decimal, 1/sqrt(2) ties 2/sqrt(8)
  JointCounts acc(3, 8);
  acc.add({1, 2, 8, 1.0});
  acc.add({2, 8, 32, 1.0});
  const auto cdf = empirical_cdf(acc, Normalization::period);
  ASSERT_EQ(cdf.size(), 1u);
  EXPECT_DOUBLE_EQ(cdf[0].F, 1.0);
  EXPECT_LT(detail::compare_atoms({3, 9, 1}, {3, 8, 1}), 0);
  EXPECT_GT(detail::compare_atoms({-3, 9, 1}, {-3, 8, 1}), 0);
  EXPECT_EQ(detail::compare_atoms({0, 9, 1}, {0, 2, 1}), 0);
}

TEST(EmpiricalCdf, SingleNecklaceIsOneStep) {
  JointCounts acc(5, 4);
  acc.add(compute_invariants(Word{3, 2, 3, 4}));
  const auto cdf = empirical_cdf(acc, Normalization::word);
  ASSERT_EQ(cdf.size(), 1u);
  EXPECT_DOUBLE_EQ(cdf[0].F, 1.0);
  EXPECT_THROW(empirical_cdf(JointCounts(5, 4), Normalization::period), DomainError);
}

TEST(KsDistance, DegeneratePointMass) {
  JointCounts acc(5, 4);
  acc.add(compute_invariants(Word{1, 1}));
  for (Normalization norm : {Normalization::period, Normalization::maxN, Normalization::word}) {
    EXPECT_DOUBLE_EQ(ks_distance(acc, norm, 2.0).ks, 0.5);
  }
  EXPECT_NEAR(ks_distance(acc, Normalization::geom, 2.0).ks, 0.5, 1e-12);
  EXPECT_THROW(ks_distance(acc, Normalization::period, 0.0), DomainError);
}

TEST(KsDistance, TwoLetterCaseByHand) {
  const JointCounts acc = full_run(2, 2);
  const double g = gaussian_cdf(-1 / std::sqrt(2.0), 0.25);
  // jumps at -1/sqrt2 (0 -> 1/4), 0 (1/4 -> 3/4), 1/sqrt2 (3/4 -> 1)
  const double expected = std::max({g, std::abs(0.25 - g), 0.25});
  const DistributionReport r = ks_distance(acc, Normalization::period, 0.25);
  EXPECT_DOUBLE_EQ(r.ks, expected);
  EXPECT_DOUBLE_EQ(r.mean, 0.0);
  EXPECT_DOUBLE_EQ(r.variance, 0.25);
  EXPECT_EQ(r.count, 4u);
}

TEST(KsDistance, DiscretizedTargetIsClose) {
  // psi ~ N(0, 20^2) rounded to the integers; atoms psi / sqrt(2)
  JointCounts acc(255, 2);
  std::uint64_t heaviest = 0;
  for (int k = -120; k <= 120; ++k) {
    const auto w = static_cast<std::uint64_t>(
        std::llround(1e4 * (gaussian_cdf(k + 0.5, 400.0) - gaussian_cdf(k - 0.5, 400.0))));
    heaviest = std::max(heaviest, w);
    for (std::uint64_t i = 0; i < w; ++i) acc.add({k, 2, 4, 1.0});
  }
  const DistributionReport r = ks_distance(acc, Normalization::period, 200.0);
  // half an atom plus rounding
  EXPECT_LT(r.ks, 0.5 * double(heaviest) / double(acc.total()) + 1e-3);
}

TEST(KsDistance, GeomErrorBoundDefinition) {
  const JointCounts acc = full_run(3, 8, {64, 1.0});
  const DistributionReport r = ks_distance(acc, Normalization::geom, 0.4);
  std::uint64_t heaviest = 0;
  for (auto b : acc.bins()) heaviest = std::max(heaviest, b);
  EXPECT_DOUBLE_EQ(r.ks_error_bound, double(heaviest + acc.underflow() + acc.overflow()) / double(acc.total()));
  EXPECT_GT(r.ks, 0.0);
  EXPECT_LT(r.ks, 1.0);
}

TEST(CharFn, TrivialAndSymmetric) {
  const JointCounts acc = full_run(3, 8);
  const auto [re0, im0] = empirical_char_fn(acc, Normalization::period, 0.0);
  EXPECT_DOUBLE_EQ(re0, 1.0);
  EXPECT_DOUBLE_EQ(im0, 0.0);
  for (double t : {0.3, 1.0, 2.5, 7.0}) {
    for (Normalization norm : {Normalization::period, Normalization::maxN}) {
      EXPECT_LT(std::abs(empirical_char_fn(acc, norm, t).second), 1e-12);
    }
  }
  EXPECT_THROW(empirical_char_fn(acc, Normalization::geom, 1.0), DomainError);
  EXPECT_THROW(empirical_char_fn(acc, Normalization::word, 1.0), DomainError);
}

TEST(RatioReport, SingleNecklace) {
  JointCounts acc(3, 2);
  acc.add(compute_invariants(Word{1, 1}));
  const RatioReport r = ratio_report(acc);
  EXPECT_DOUBLE_EQ(r.mean_w, 2.0);
  EXPECT_DOUBLE_EQ(r.var_w, 0.0);
  EXPECT_NEAR(r.mean_g, 2 * std::log(std::numbers::phi), 1e-15);
  EXPECT_THROW(ratio_report(JointCounts(3, 2)), DomainError);
}

TEST(RatioReport, WordRatioMeanIsExact) {
  // digit reversal a -> A + 1 - a permutes Pi_A(N), so the mean is A + 1
  for (int A = 2; A <= 4; ++A) {
    EXPECT_NEAR(ratio_report(full_run(A, 6)).mean_w, A + 1.0, 1e-12);
  }
}

TEST(Normalization, Parsing) {
  EXPECT_EQ(parse_normalization("period"), Normalization::period);
  EXPECT_EQ(parse_normalization("maxn"), Normalization::maxN);
  EXPECT_EQ(parse_normalization("word"), Normalization::word);
  EXPECT_EQ(parse_normalization("geom"), Normalization::geom);
  EXPECT_EQ(std::string(to_string(Normalization::maxN)), "maxn");
  EXPECT_THROW(parse_normalization("cauchy"), DomainError);
}

TEST(JointCounts, SparseStorageForLargeAlphabets) {
  // (A, N) = (200, 4) exceeds the dense table size
  JointCounts acc(200, 4), copy(200, 4);
  const std::vector<Word> words{{200, 1}, {1, 200}, {7, 7, 3, 9}, {1, 1}, {7, 7, 3, 9}};
  for (const auto& w : words) acc.add(compute_invariants(w));
  EXPECT_EQ(acc.cell(2, 199, 402), 1u);
  EXPECT_EQ(acc.cell(2, -199, 402), 1u);
  EXPECT_EQ(acc.cell(4, -6, 52), 2u);
  EXPECT_EQ(acc.cell(4, 6, 52), 0u);
  const auto cells = acc.cells();
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(std::tie(cells[0].n, cells[0].psi, cells[0].lw), std::make_tuple(2, -199, 402));
  EXPECT_EQ(std::tie(cells[3].n, cells[3].psi, cells[3].lw, cells[3].count), std::make_tuple(4, -6, 52, std::uint64_t(2)));
  copy.merge(acc);
  copy.merge(acc);
  EXPECT_EQ(copy.cell(4, -6, 52), 4u);
  EXPECT_EQ(copy.total(), 10u);
}
