#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "missmass/beta.hpp"
#include "missmass/rng.hpp"
#include "missmass/special.hpp"
#include "oracle_values.hpp"

namespace missmass {
namespace {

double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

TEST(LogBeta, Examples) {
  EXPECT_NEAR(log_beta(1.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(log_beta(2.0, 2.0), std::log(1.0 / 6.0), 1e-15);
  EXPECT_LT(rel_err(log_beta(100.5, 200.5), oracle::kLogBeta_100_5_200_5), 1e-13);
  EXPECT_THROW(log_beta(0.0, 1.0), DomainError);
  EXPECT_THROW(log_beta(1.0, -2.0), DomainError);
}

// Boost's lgamma is an independent implementation; compare over the whole
// range up to 1e6 in both arguments.
TEST(LogBeta, AgreesWithBoostAcrossScales) {
  Rng rng(RngStream{3, 0});
  for (int i = 0; i < 5000; ++i) {
    const double a = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e9));
    const double b = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e9));
    const long double la = a, lb = b;
    const long double ref = boost::math::lgamma(la) + boost::math::lgamma(lb) - boost::math::lgamma(la + lb);
    const double got = log_beta(a, b);
    // Absolute error scaled to the size of the individual lgamma terms.
    const double scale = std::max({1.0, std::fabs(static_cast<double>(ref)), std::log(a + b)});
    EXPECT_LT(std::fabs(got - static_cast<double>(ref)), 1e-12 * scale) << a << " " << b;
  }
}

TEST(LogChoose, SmallValues) {
  EXPECT_DOUBLE_EQ(log_choose(5, 0), 0.0);
  EXPECT_NEAR(log_choose(5, 2), std::log(10.0), 1e-14);
  EXPECT_NEAR(log_choose(50, 25), std::log(126410606437752.0), 1e-12);
  EXPECT_THROW(log_choose(3, 4), DomainError);
}

TEST(BetaPdf, Examples) {
  for (double x : {0.0, 0.1, 0.5, 0.99, 1.0}) EXPECT_NEAR(beta_pdf({1, 1}, x), 1.0, 1e-15);
  EXPECT_NEAR(beta_pdf({2, 2}, 0.5), 1.5, 1e-14);
  const BetaParams p{300, 700};
  EXPECT_LT(rel_err(beta_pdf(p, beta_mode(p)), oracle::kBeta300_700PdfAtMode), 1e-10);
}

TEST(BetaPdf, EndpointConventions) {
  EXPECT_DOUBLE_EQ(beta_pdf({2, 3}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(beta_pdf({2, 3}, 1.0), 0.0);
  EXPECT_NEAR(beta_pdf({1, 3}, 0.0), 3.0, 1e-14);
  EXPECT_NEAR(beta_pdf({3, 1}, 1.0), 3.0, 1e-14);
  EXPECT_THROW(beta_pdf({0.5, 2}, 0.0), DomainError);
  EXPECT_THROW(beta_pdf({2, 0.5}, 1.0), DomainError);
  EXPECT_THROW(beta_pdf({2, 2}, 1.5), DomainError);
  EXPECT_THROW(beta_pdf({2, 2}, -0.1), DomainError);
}

TEST(RegIncBeta, Examples) {
  EXPECT_NEAR(reg_inc_beta({1, 1}, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(reg_inc_beta({1, 2}, 0.5), 0.75, 1e-15);
  for (double n : {1.0, 3.0, 17.0, 1000.0}) {
    for (double x : {1e-6, 0.01, 0.3, 0.9}) {
      EXPECT_NEAR(reg_inc_beta({1, n}, x), -std::expm1(n * std::log1p(-x)), 1e-14);
    }
  }
  EXPECT_THROW(reg_inc_beta({1, 1}, 1.1), DomainError);
  EXPECT_THROW(reg_inc_beta({0, 1}, 0.5), DomainError);
}

TEST(RegIncBeta, FrozenMpmathValues) {
  EXPECT_NEAR(reg_inc_beta({0.5, 5.0}, 0.2), oracle::kIbeta_0_5_5_0_2, 1e-14);
  EXPECT_NEAR(reg_inc_beta({2.5, 3.5}, 0.4), oracle::kIbeta_2_5_3_5_0_4, 1e-14);
  EXPECT_NEAR(reg_inc_beta({50, 70}, 0.45), oracle::kIbeta_50_70_0_45, 1e-13);
  EXPECT_NEAR(reg_inc_beta({1000, 3000}, 0.251), oracle::kIbeta_1000_3000_0_251, 1e-13);
  EXPECT_NEAR(reg_inc_beta({0.3, 0.7}, 0.9), oracle::kIbeta_0_3_0_7_0_9, 1e-14);
}

TEST(RegIncBeta, AgreesWithBoost) {
  Rng rng(RngStream{4, 0});
  for (int i = 0; i < 5000; ++i) {
    const double a = std::exp(std::log(0.05) + rng.uniform() * std::log(1e5 / 0.05));
    const double b = std::exp(std::log(0.05) + rng.uniform() * std::log(1e5 / 0.05));
    // Concentrate x where the CDF moves.
    const double mean = a / (a + b);
    const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
    const double x = std::clamp(mean + sd * 4.0 * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
    const double ref = boost::math::ibeta(a, b, x);
    EXPECT_NEAR(reg_inc_beta({a, b}, x), ref, 1e-13) << a << " " << b << " " << x;
  }
}

TEST(RegIncBeta, EndpointsSymmetryMonotonicity) {
  Rng rng(RngStream{5, 0});
  for (int i = 0; i < 2000; ++i) {
    const double a = 0.1 + 200.0 * rng.uniform();
    const double b = 0.1 + 200.0 * rng.uniform();
    const BetaParams p{a, b};
    EXPECT_EQ(reg_inc_beta(p, 0.0), 0.0);
    EXPECT_EQ(reg_inc_beta(p, 1.0), 1.0);
    const double x = rng.uniform();
    EXPECT_NEAR(reg_inc_beta(p, x), 1.0 - reg_inc_beta({b, a}, 1.0 - x), 1e-12);
    EXPECT_NEAR(reg_inc_beta_complement(p, x), 1.0 - reg_inc_beta(p, x), 1e-12);
  }
  const BetaParams p{7.5, 40};
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double v = reg_inc_beta(p, i / 2000.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

// I_x(a + 1, b) = I_x(a, b) - x^a (1 - x)^b / (a B(a, b)).
TEST(RegIncBeta, RecurrenceIdentity) {
  Rng rng(RngStream{6, 0});
  for (int i = 0; i < 10000; ++i) {
    const double a = 0.1 + 500.0 * rng.uniform();
    const double b = 0.1 + 500.0 * rng.uniform();
    const double x = rng.uniform_open();
    const double lhs = reg_inc_beta({a + 1.0, b}, x);
    const double term = std::exp(a * std::log(x) + b * std::log1p(-x) - std::log(a) - log_beta(a, b));
    EXPECT_NEAR(lhs, reg_inc_beta({a, b}, x) - term, 1e-11) << a << " " << b << " " << x;
  }
}

TEST(BetaMedian, Examples) {
  EXPECT_NEAR(beta_median({1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(beta_median({1, 2}), 1.0 - 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(beta_median({1, 2}), 0.292893, 1e-6);
  for (double n : {1.0, 5.0, 100.0, 1e4}) {
    EXPECT_NEAR(beta_median({1, n}), -std::expm1(-std::log(2.0) / n), 1e-15);
  }
}

TEST(BetaMedian, MatchesBoostInverse) {
  Rng rng(RngStream{7, 0});
  for (int i = 0; i < 300; ++i) {
    const double a = 0.2 + 300.0 * rng.uniform();
    const double b = 0.2 + 300.0 * rng.uniform();
    EXPECT_NEAR(beta_median({a, b}), boost::math::ibeta_inv(a, b, 0.5), 1e-12);
  }
}

// (a - 2)/(n - 3) <= m_{a-1,b} <= (a - 1)/(n - 1) with n = a + b.
TEST(BetaMedian, ModeMedianMeanBracketAt5_95) {
  const double a = 5, b = 95, n = a + b;
  const double m = beta_median({a - 1.0, b});
  EXPECT_LE((a - 2.0) / (n - 3.0), m);
  EXPECT_LE(m, (a - 1.0) / (n - 1.0));
}

TEST(BetaMode, Examples) {
  EXPECT_DOUBLE_EQ(beta_mode({2, 2}), 0.5);
  EXPECT_DOUBLE_EQ(beta_mode({3, 2}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(beta_mode({101, 201}), 100.0 / 300.0);
  EXPECT_THROW(beta_mode({1, 2}), DomainError);
  EXPECT_THROW(beta_mode({2, 0.5}), DomainError);
}

}  // namespace
}  // namespace missmass
