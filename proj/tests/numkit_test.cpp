#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bagoft/numkit.hpp"
#include "oracles.hpp"

using namespace bagoft::numkit;

TEST(Chi2Sf, ZeroHasAllMassAbove) { EXPECT_DOUBLE_EQ(chi2_sf(0.0, 5), 1.0); }

TEST(Chi2Sf, FivePercentPointFiveDf) {
  EXPECT_NEAR(chi2_sf(11.0705, 5), 0.05, 1e-4);
  EXPECT_NEAR(oracle::chi2_critical(0.05, 5), 11.0705, 1e-3);
  EXPECT_NEAR(chi2_sf(oracle::chi2_critical(0.05, 5), 5), 0.05, 1e-9);
}

TEST(Chi2Sf, FivePercentPointOneDf) {
  EXPECT_NEAR(chi2_sf(3.8415, 1), 0.05, 1e-4);
  EXPECT_NEAR(chi2_sf(oracle::chi2_critical(0.05, 1), 1), 0.05, 1e-9);
}

TEST(Chi2Sf, RejectsBadArguments) {
  EXPECT_THROW(chi2_sf(-1.0, 3), std::domain_error);
  EXPECT_THROW(chi2_sf(1.0, 0), std::domain_error);
}

TEST(Chi2Sf, MatchesSeriesOracleOnGrid) {
  for (unsigned df : {1u, 2u, 3u, 5u, 8u, 10u, 30u}) {
    for (double x = 0.05; x < 60.0; x *= 1.3) {
      EXPECT_NEAR(chi2_sf(x, df), oracle::chi2_sf(x, df), 1e-10) << "df=" << df << " x=" << x;
    }
  }
}

TEST(Chi2Sf, DecreasingInX) {
  // Strict wherever the previous value is distinguishable from 1 in double.
  for (unsigned df : {1u, 3u, 5u, 12u}) {
    double prev = chi2_sf(0.0, df);
    for (double x = 0.01; x < 40.0; x += 0.01) {
      const double cur = chi2_sf(x, df);
      ASSERT_LE(cur, prev) << "df=" << df << " x=" << x;
      if (prev < 1.0) {
        ASSERT_LT(cur, prev) << "df=" << df << " x=" << x;
      }
      prev = cur;
    }
  }
}

TEST(Chi2Sf, ComplementsLowerTailOracle) {
  for (unsigned df : {1u, 2u, 5u, 9u}) {
    for (double x = 0.1; x < 30.0; x += 0.7) {
      EXPECT_NEAR(chi2_sf(x, df) + oracle::chi2_cdf(x, df), 1.0, 1e-9);
      EXPECT_NEAR(chi2_sf(x, df) + chi2_cdf(x, df), 1.0, 1e-12);
    }
  }
}

TEST(RegularizedGamma, PPlusQIsOne) {
  for (double a : {0.5, 1.0, 2.5, 7.0}) {
    for (double x : {0.01, 0.5, 1.0, 3.0, 9.0, 25.0}) {
      EXPECT_NEAR(regularized_gamma_p(a, x) + regularized_gamma_q(a, x), 1.0, 1e-12);
    }
  }
}

TEST(GaussianQuantile, Median) { EXPECT_DOUBLE_EQ(gaussian_quantile(0.5), 0.0); }

TEST(GaussianQuantile, UpperFivePercent) {
  EXPECT_NEAR(gaussian_quantile(0.95), 1.6449, 1e-4);
  EXPECT_NEAR(gaussian_quantile(0.95), oracle::normal_quantile(0.95), 1e-9);
}

TEST(GaussianQuantile, LowerFivePercent) {
  EXPECT_NEAR(gaussian_quantile(0.05), -1.6449, 1e-4);
  EXPECT_NEAR(gaussian_quantile(0.05), -gaussian_quantile(0.95), 1e-12);
}

TEST(GaussianQuantile, OutsideUnitIntervalThrows) {
  EXPECT_THROW(gaussian_quantile(0.0), std::domain_error);
  EXPECT_THROW(gaussian_quantile(1.0), std::domain_error);
}

TEST(GaussianQuantile, RoundTripsThroughCdf) {
  for (double p = 1e-6; p < 1.0; p += 0.0137) {
    EXPECT_NEAR(gaussian_cdf(gaussian_quantile(p)), p, 1e-7) << p;
  }
  for (double p : {1e-10, 1e-8, 1 - 1e-8}) EXPECT_NEAR(gaussian_cdf(gaussian_quantile(p)), p, 1e-7);
}

TEST(GaussianCdf, MatchesErfSeriesOracle) {
  for (double z = -6.0; z <= 6.0; z += 0.25) {
    EXPECT_NEAR(gaussian_cdf(z), oracle::normal_cdf(z), 1e-12) << z;
  }
}

TEST(EmpiricalQuantiles, LowerMedianConvention) {
  const std::vector<double> v{1, 2, 3, 4};
  const std::vector<double> p{0.5};
  EXPECT_EQ(empirical_quantiles(v, p), std::vector<double>{2});
}

TEST(EmpiricalQuantiles, SingleSample) {
  const std::vector<double> v{5};
  const std::vector<double> p{0.1, 0.9};
  EXPECT_EQ(empirical_quantiles(v, p), (std::vector<double>{5, 5}));
}

TEST(EmpiricalQuantiles, OneToHundredQuartiles) {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  const std::vector<double> p{0.25, 0.75};
  const auto q = empirical_quantiles(v, p);
  EXPECT_EQ(q, (std::vector<double>{25, 75}));
  EXPECT_EQ(q[0], oracle::lower_quantile_by_count(v, 0.25));
  EXPECT_EQ(q[1], oracle::lower_quantile_by_count(v, 0.75));
}

TEST(EmpiricalQuantiles, MatchesCountingOracleWithTies) {
  std::vector<double> v;
  for (int i = 0; i < 97; ++i) v.push_back(std::floor(std::sin(i * 1.7) * 6));
  for (double p = 0.01; p < 1.0; p += 0.03) {
    const std::vector<double> probs{p};
    EXPECT_EQ(empirical_quantiles(v, probs)[0], oracle::lower_quantile_by_count(v, p)) << p;
  }
}

TEST(EmpiricalQuantiles, Errors) {
  const std::vector<double> empty;
  const std::vector<double> half{0.5};
  EXPECT_THROW(empirical_quantiles(empty, half), std::invalid_argument);
  const std::vector<double> v{1, 2};
  const std::vector<double> bad{1.5};
  EXPECT_THROW(empirical_quantiles(v, bad), std::invalid_argument);
}

TEST(Logistic, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_GT(logistic(-800.0), -1e-300);
  EXPECT_EQ(logistic(800.0), 1.0);
  EXPECT_NEAR(logistic(-1.5), 0.18243, 1e-5);
}
