#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "gm/errors.hpp"
#include "gm/noise.hpp"

namespace {

using gm::NoiseModel;

// Independent long-double Maclaurin series for erfc, adequate for |t| <= 3.
long double erfc_series_oracle(long double t) {
  long double term = t;
  long double sum = t;
  for (int n = 1; n < 400; ++n) {
    term *= -t * t / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  return 1.0L - 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
}

std::vector<NoiseModel> continuous_families() {
  return {NoiseModel::logistic(2.0), NoiseModel::logistic(0.3), NoiseModel::gaussian(1.0),
          NoiseModel::gaussian(0.7), NoiseModel::laplace(1.5)};
}

TEST(Survival, LogisticSymmetryAndLimit) {
  const auto n = NoiseModel::logistic(2.0);
  EXPECT_DOUBLE_EQ(n.survival(0.0), 0.5);
  EXPECT_EQ(n.survival(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_LT(n.survival(1e4), 1e-300);
  EXPECT_DOUBLE_EQ(n.survival(1.0), 1.0 / (1.0 + std::exp(0.5)));
}

TEST(Survival, GaussianMatchesIndependentErfc) {
  const auto n = NoiseModel::gaussian(1.0);
  const double expected = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(n.survival(1.0), expected, 1e-12);
  const long double series = 0.5L * erfc_series_oracle(1.0L / std::sqrt(2.0L));
  EXPECT_NEAR(n.survival(1.0), static_cast<double>(series), 1e-12);
}

TEST(Survival, GaussianRelativeAccuracyAcrossRange) {
  for (double z = -8.0; z <= 30.0; z += 0.0625) {
    const double mine = gm::normal_upper_tail(z);
    const double ref = 0.5 * std::erfc(z / std::sqrt(2.0));
    ASSERT_LE(std::abs(mine - ref), 1e-13 * ref + 1e-300) << "z = " << z;
  }
}

TEST(Survival, DiscreteFamilies) {
  const auto tp = NoiseModel::two_point(1.0, 0.5);
  EXPECT_EQ(tp.survival(-2.0), 1.0);
  EXPECT_EQ(tp.survival(-1.0), 1.0);  // atom at -1 counts in P[eps >= -1]
  EXPECT_EQ(tp.survival(0.0), 0.5);
  EXPECT_EQ(tp.survival(1.0), 0.5);
  EXPECT_EQ(tp.survival(1.5), 0.0);
  EXPECT_EQ(tp.cdf(-1.0), 0.5);
  EXPECT_EQ(tp.cdf(1.0), 1.0);

  const auto mix = NoiseModel::noise_trader(0.3);
  for (double y : {-5.0, 0.0, 7.0}) {
    EXPECT_EQ(mix.survival(y), 0.3);
    EXPECT_DOUBLE_EQ(mix.cdf(y), 0.7);
  }
  EXPECT_TRUE(tp.static_only());
  EXPECT_TRUE(mix.static_only());
  EXPECT_THROW(tp.density(0.0), gm::Error);
}

TEST(Survival, ContinuousInvariants) {
  for (const auto& n : continuous_families()) {
    double prev = 1.0;
    for (double y = -10.0; y <= 10.0; y += 0.01) {
      const double phi = n.survival(y);
      const double psi = n.cdf(y);
      ASSERT_GE(phi, 0.0);
      ASSERT_LE(phi, 1.0);
      ASSERT_LE(phi, prev + 1e-16) << n.name();
      ASSERT_LE(std::abs(phi + psi - 1.0), 1e-12) << n.name() << " y=" << y;
      ASSERT_GE(n.density(y), 0.0);
      prev = phi;
    }
  }
}

TEST(Survival, DensityMatchesFiniteDifference) {
  const double h = 1e-4;
  const double c = 2.0;
  struct Case {
    NoiseModel noise;
    double third_derivative_bound;
  };
  const double s = 0.8;
  const double sigma = 0.9;
  const std::vector<Case> cases{
      {NoiseModel::logistic(s), 1.0 / (8.0 * s * s * s)},
      {NoiseModel::gaussian(sigma), 1.0 / (sigma * sigma * sigma * std::sqrt(2.0 * std::numbers::pi))},
  };
  for (const auto& cs : cases) {
    for (double y = -c; y <= c; y += 0.01) {
      const double fd = (cs.noise.survival(y + h) - cs.noise.survival(y - h)) / (2.0 * h);
      ASSERT_LE(std::abs(fd + cs.noise.density(y)), 10.0 * h * h * cs.third_derivative_bound + 1e-11)
          << cs.noise.name() << " y=" << y;
    }
  }
  // Laplace: smooth away from the kink of its density at 0.
  const auto lap = NoiseModel::laplace(1.0);
  for (double y = -c; y <= c; y += 0.01) {
    if (std::abs(y) < 2 * h) continue;
    const double fd = (lap.survival(y + h) - lap.survival(y - h)) / (2.0 * h);
    ASSERT_LE(std::abs(fd + lap.density(y)), 10.0 * h * h * 0.5 + 1e-11) << "y=" << y;
  }
}

TEST(Condition, LogisticKEqualsWidthOverScale) {
  for (double scale : {0.5, 1.0, 2.0, 3.7}) {
    for (double c : {0.25, 1.0, 2.0}) {
      const auto r = gm::check_gm_condition(NoiseModel::logistic(scale), c);
      EXPECT_NEAR(r.K, c / scale, 1e-6);
      // The scan over [-C, C] never exceeds the global supremum and equals
      // (C/s) / (1 + exp(-C/s)), attained at the interval ends.
      EXPECT_LE(r.K_grid, r.K + 1e-12);
      EXPECT_NEAR(r.K_grid, (c / scale) / (1.0 + std::exp(-c / scale)), 1e-12);
      EXPECT_EQ(r.grid_points, gm::kConditionGridPoints);
    }
  }
}

TEST(Condition, LogisticExamples) {
  const auto pass = gm::check_gm_condition(NoiseModel::logistic(2.0), 1.0);
  EXPECT_TRUE(pass.passes);
  EXPECT_NEAR(pass.K, 0.5, 1e-12);
  EXPECT_NEAR(pass.M, 1.0 / 8.0, 1e-15);

  const auto fail = gm::check_gm_condition(NoiseModel::logistic(0.5), 1.0);
  EXPECT_FALSE(fail.passes);
  EXPECT_NEAR(fail.K, 2.0, 1e-12);
}

TEST(Condition, AllBuyLowerBound) {
  for (const auto& n : continuous_families()) {
    for (double c : {0.1, 0.5, 1.0, 2.0}) {
      const auto r = gm::check_gm_condition(n, c);
      EXPECT_GE(r.K, 0.0);
      EXPECT_GE(r.M, 0.0);
      EXPECT_GE(r.phi_at_C, 0.0);
      EXPECT_LE(r.phi_at_C, 1.0);
      EXPECT_EQ(r.passes, r.K < 1.0 && r.phi_at_zero > 0.0 && r.phi_at_zero < 1.0);
      if (r.K < 1.0) EXPECT_GE(r.phi_at_C, r.phi_C_lower_bound) << n.name() << " C=" << c;
    }
  }
}

TEST(Condition, GaussianGridMatchesEndpointHazard) {
  // The normal hazard rate is increasing, so the supremum on [-C, C] sits at y = C.
  const double sigma = 1.3;
  const double c = 0.8;
  const auto n = NoiseModel::gaussian(sigma);
  const auto r = gm::check_gm_condition(n, c);
  EXPECT_NEAR(r.K, c * n.density(c) / n.survival(c), 1e-12);
  EXPECT_NEAR(r.M, 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi)), 1e-15);
}

TEST(Condition, Errors) {
  EXPECT_THROW(gm::check_gm_condition(NoiseModel::two_point(1.0, 0.5), 1.0), gm::Error);
  try {
    gm::check_gm_condition(NoiseModel::noise_trader(0.5), 1.0);
    FAIL();
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::NotDifferentiable);
  }
  EXPECT_THROW(gm::check_gm_condition(NoiseModel::logistic(1.0), 0.0), gm::Error);
  EXPECT_THROW(NoiseModel::logistic(-1.0), gm::Error);
  EXPECT_THROW(NoiseModel::two_point(1.0, 1.5), gm::Error);
}

TEST(Sample, LogisticKolmogorovSmirnov) {
  const auto n = NoiseModel::logistic(2.0);
  gm::Rng rng(12345);
  const std::size_t count = 100000;
  std::vector<double> draws(count);
  for (auto& d : draws) d = n.sample(rng);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double f = n.cdf(draws[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / count),
                   std::abs(f - static_cast<double>(i + 1) / count)});
  }
  EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(count)));

  gm::Rng a(12345);
  gm::Rng b(12345);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(n.sample(a), n.sample(b));
}

TEST(Sample, GaussianAndLaplaceKolmogorovSmirnov) {
  for (const auto& n : {NoiseModel::gaussian(0.7), NoiseModel::laplace(1.2)}) {
    gm::Rng rng(99);
    const std::size_t count = 50000;
    std::vector<double> draws(count);
    for (auto& d : draws) d = n.sample(rng);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double f = n.cdf(draws[i]);
      ks = std::max({ks, std::abs(f - static_cast<double>(i) / count),
                     std::abs(f - static_cast<double>(i + 1) / count)});
    }
    EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(count))) << n.name();
  }
}

TEST(Sample, TwoPointFrequency) {
  const auto n = NoiseModel::two_point(1.0, 0.5);
  gm::Rng rng(7);
  const int count = 10000;
  int plus = 0;
  for (int i = 0; i < count; ++i) {
    const double e = n.sample(rng);
    ASSERT_TRUE(e == 1.0 || e == -1.0);
    plus += e > 0;
  }
  EXPECT_LE(std::abs(plus / double(count) - 0.5), 3.0 * std::sqrt(0.25 / count));
}

TEST(Sample, NoiseTraderMixIsInfinite) {
  const auto n = NoiseModel::noise_trader(0.3);
  gm::Rng rng(8);
  const int count = 10000;
  int plus = 0;
  for (int i = 0; i < count; ++i) {
    const double e = n.sample(rng);
    ASSERT_TRUE(std::isinf(e));
    plus += e > 0;
  }
  EXPECT_LE(std::abs(plus / double(count) - 0.3), 3.0 * std::sqrt(0.21 / count));
}

}  // namespace
