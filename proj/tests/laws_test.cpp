#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gwcusum/errors.hpp"
#include "gwcusum/laws.hpp"
#include "test_support.hpp"

using namespace gwcusum;

namespace {

struct Moments {
  double mean, m2, m3, m4;
};

// Brute-force central moments of a PMF on 0..K.
Moments pmf_moments(const std::vector<double>& probs) {
  double mean = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) mean += k * probs[k];
  Moments out{mean, 0, 0, 0};
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double d = k - mean;
    out.m2 += probs[k] * d * d;
    out.m3 += probs[k] * d * d * d;
    out.m4 += probs[k] * d * d * d * d;
  }
  return out;
}

std::vector<double> poisson_pmf_truncated(double lambda, int kmax) {
  std::vector<double> p(kmax + 1);
  p[0] = std::exp(-lambda);
  for (int k = 1; k <= kmax; ++k) p[k] = p[k - 1] * lambda / k;
  return p;
}

}  // namespace

TEST(Law, BernoulliHalfMoments) {
  const Law law = Law::bernoulli(0.5);
  EXPECT_DOUBLE_EQ(law.mean(), 0.5);
  EXPECT_DOUBLE_EQ(law.variance(), 0.25);
  EXPECT_DOUBLE_EQ(law.third_central(), 0.0);
  EXPECT_DOUBLE_EQ(law.fourth_central(), 0.0625);
}

TEST(Law, BernoulliMatchesPmfSummation) {
  for (double p : {0.0, 0.1, 0.37, 0.8, 1.0}) {
    const Law law = Law::bernoulli(p);
    const Moments ref = pmf_moments({1 - p, p});
    EXPECT_NEAR(law.mean(), ref.mean, 1e-14);
    EXPECT_NEAR(law.variance(), ref.m2, 1e-14);
    EXPECT_NEAR(law.third_central(), ref.m3, 1e-14);
    EXPECT_NEAR(law.fourth_central(), ref.m4, 1e-14);
  }
}

TEST(Law, PoissonOneMatchesTruncatedPmf) {
  const Law law = Law::poisson(1.0);
  EXPECT_DOUBLE_EQ(law.mean(), 1.0);
  EXPECT_DOUBLE_EQ(law.variance(), 1.0);
  EXPECT_DOUBLE_EQ(law.third_central(), 1.0);
  EXPECT_DOUBLE_EQ(law.fourth_central(), 4.0);
  for (double lambda : {0.2, 1.0, 3.5}) {
    const Moments ref = pmf_moments(poisson_pmf_truncated(lambda, 80));
    const Law l = Law::poisson(lambda);
    EXPECT_NEAR(l.mean(), ref.mean, 1e-12);
    EXPECT_NEAR(l.variance(), ref.m2, 1e-12);
    EXPECT_NEAR(l.third_central(), ref.m3, 1e-11);
    EXPECT_NEAR(l.fourth_central(), ref.m4, 1e-10);
  }
}

TEST(Law, DegenerateHasZeroCentralMoments) {
  const Law law = Law::degenerate(3);
  EXPECT_DOUBLE_EQ(law.mean(), 3.0);
  EXPECT_EQ(law.variance(), 0.0);
  EXPECT_EQ(law.third_central(), 0.0);
  EXPECT_EQ(law.fourth_central(), 0.0);
  EXPECT_TRUE(law.is_degenerate());
}

TEST(Law, FinitePmfMomentsExact) {
  const std::vector<double> probs{0.1, 0.25, 0.05, 0.4, 0.2};
  const Law law = Law::finite_pmf(probs);
  const Moments ref = pmf_moments(probs);
  EXPECT_NEAR(law.mean(), ref.mean, 1e-12);
  EXPECT_NEAR(law.variance(), ref.m2, 1e-12);
  EXPECT_NEAR(law.third_central(), ref.m3, 1e-12);
  EXPECT_NEAR(law.fourth_central(), ref.m4, 1e-12);
}

TEST(Law, JensenHoldsOnRandomPmfs) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> probs(1 + trial % 7);
    double total = 0;
    for (double& p : probs) total += (p = u(gen));
    for (double& p : probs) p /= total;
    double s = 0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) s += probs[k];
    probs.back() = 1.0 - s;
    const Law law = Law::finite_pmf(probs);
    EXPECT_GE(law.variance(), 0.0);
    EXPECT_GE(law.fourth_central(), law.variance() * law.variance() - 1e-15);
  }
}

TEST(Law, RejectsInvalidParameters) {
  EXPECT_THROW((void)Law::bernoulli(-0.1), InvalidParameter);
  EXPECT_THROW((void)Law::bernoulli(1.1), InvalidParameter);
  EXPECT_THROW((void)Law::poisson(-1.0), InvalidParameter);
  EXPECT_THROW((void)Law::degenerate(-2), InvalidParameter);
  EXPECT_THROW((void)Law::finite_pmf({0.5, 0.4}), InvalidParameter);
  EXPECT_THROW((void)Law::finite_pmf({1.2, -0.2}), InvalidParameter);
  EXPECT_THROW((void)Law::finite_pmf({}), InvalidParameter);
  EXPECT_THROW((void)Law::bernoulli(std::nan("")), InvalidParameter);
}

TEST(Law, MakeLawDispatches) {
  EXPECT_EQ(make_law(LawKind::Bernoulli, {0.3}), Law::bernoulli(0.3));
  EXPECT_EQ(make_law(LawKind::Poisson, {2.0}), Law::poisson(2.0));
  EXPECT_EQ(make_law(LawKind::Degenerate, {4}), Law::degenerate(4));
  EXPECT_EQ(make_law(LawKind::FinitePmf, {0.5, 0.5}), Law::finite_pmf({0.5, 0.5}));
  EXPECT_THROW((void)make_law(LawKind::Bernoulli, {}), InvalidParameter);
}

TEST(SampleSum, EmptySumIsZero) {
  Rng rng(1);
  for (const Law& law : {Law::bernoulli(0.4), Law::poisson(2.0), Law::degenerate(5), Law::finite_pmf({0.2, 0.8})}) {
    EXPECT_EQ(sample_sum(law, 0, rng), 0);
  }
}

TEST(SampleSum, DegenerateIsDeterministic) {
  Rng rng(1);
  EXPECT_EQ(sample_sum(Law::degenerate(2), 5, rng), 10);
}

TEST(SampleSum, LargeBernoulliSumMean) {
  Rng rng(5);
  const int calls = 1000;
  const std::int64_t n = 1000000;
  double total = 0;
  for (int i = 0; i < calls; ++i) total += static_cast<double>(sample_sum(Law::bernoulli(0.5), n, rng));
  const double mean = total / calls;
  const double se = std::sqrt(n * 0.25 / calls);
  EXPECT_LT(std::abs(mean - 5e5), 3 * se);
}

TEST(SampleSum, MomentsMatchForEachKind) {
  const std::int64_t n = 7;
  for (const Law& law : {Law::bernoulli(0.3), Law::poisson(1.3), Law::degenerate(2), Law::finite_pmf({0.3, 0.1, 0.6})}) {
    Rng rng(99);
    const int draws = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < draws; ++i) {
      const double x = static_cast<double>(sample_sum(law, n, rng));
      s += x;
      s2 += x * x;
    }
    const double mean = s / draws;
    const double var = s2 / draws - mean * mean;
    const double target_var = n * law.variance();
    const double mean_se = std::sqrt(target_var / draws);
    // Variance of the sample variance: (mu4 - sigma^4) / draws with mu4 of the n-fold sum.
    const double mu4 = n * law.fourth_central() + 3.0 * n * (n - 1) * law.variance() * law.variance();
    const double var_se = std::sqrt(std::max(mu4 - target_var * target_var, 0.0) / draws);
    EXPECT_LE(std::abs(mean - n * law.mean()), 4 * mean_se + 1e-12) << to_string(law.kind());
    EXPECT_LE(std::abs(var - target_var), 4 * var_se + 1e-9) << to_string(law.kind());
  }
}

TEST(SampleSum, FastPathMatchesRepeatedDraws) {
  for (const Law& law : {Law::bernoulli(0.35), Law::poisson(0.8)}) {
    for (std::int64_t n : {1, 5, 20}) {
      Rng fast_rng(1234 + n);
      std::mt19937_64 naive_rng(777 + n);
      std::bernoulli_distribution bern(law.parameter());
      std::poisson_distribution<long long> pois(law.kind() == LawKind::Poisson ? law.parameter() : 1.0);
      std::vector<long long> fast, naive;
      for (int i = 0; i < 10000; ++i) {
        fast.push_back(sample_sum(law, n, fast_rng));
        long long s = 0;
        for (std::int64_t k = 0; k < n; ++k) s += law.kind() == LawKind::Bernoulli ? bern(naive_rng) : pois(naive_rng);
        naive.push_back(s);
      }
      int df = 0;
      const double stat = testsupport::two_sample_chi2(fast, naive, df);
      ASSERT_GE(df, 1);
      EXPECT_LT(stat, testsupport::chi2_upper(df, testsupport::kZ001)) << "n=" << n;
    }
  }
}

TEST(SampleSum, SameSeedSameDraws) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_sum(Law::poisson(2.0), i, a), sample_sum(Law::poisson(2.0), i, b));
}
