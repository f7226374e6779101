#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gm/errors.hpp"
#include "gm/static_equilibrium.hpp"

namespace {

using gm::Belief;
using gm::NoiseModel;
using gm::StateGrid;

double logistic_phi(double y, double s) { return 1.0 / (1.0 + std::exp(y / s)); }

// Hand-coded two-state g and h for logistic noise on grid {0, 1}.
double hand_g(double s, double p0, double scale) {
  const double w0 = p0 * logistic_phi(s, scale);
  const double w1 = (1 - p0) * logistic_phi(s - 1, scale);
  return w1 / (w0 + w1);
}

double hand_h(double s, double p0, double scale) {
  const double w0 = p0 * (1 - logistic_phi(s, scale));
  const double w1 = (1 - p0) * (1 - logistic_phi(s - 1, scale));
  return w1 / (w0 + w1);
}

template <class F>
double bisect_root(F f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Belief random_belief(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = u(gen) + 1e-3;
  return Belief::from_weights(w);
}

const StateGrid kBinary({0.0, 1.0});
const NoiseModel kLogistic2 = NoiseModel::logistic(2.0);

TEST(EvalG, CounterexampleHasTwoFixedPoints) {
  const StateGrid grid({1.0, 3.0});
  const Belief pi({0.75, 0.25});
  const auto noise = NoiseModel::two_point(1.0, 0.5);
  EXPECT_NEAR(gm::eval_g(9.0 / 5.0, pi, grid, noise), 9.0 / 5.0, 1e-15);
  EXPECT_NEAR(gm::eval_g(3.0, pi, grid, noise), 3.0, 1e-15);

  const auto roots = gm::scan_fixed_points(gm::Side::Ask, pi, grid, noise);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], 1.8, 1e-10);
  EXPECT_NEAR(roots[1], 3.0, 1e-10);
}

TEST(EvalG, DegenerateBeliefReturnsState) {
  const StateGrid grid({-1.0, 0.5, 2.0});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto pi = Belief::point_mass(3, i);
    for (double s : {-1.0, 0.0, 2.0}) {
      EXPECT_EQ(gm::eval_g(s, pi, grid, kLogistic2), grid[i]);
      EXPECT_EQ(gm::eval_h(s, pi, grid, kLogistic2), grid[i]);
    }
  }
}

TEST(EvalH, NoiseTraderGivesPriorMean) {
  const Belief pi({0.2, 0.5, 0.3});
  const StateGrid grid({0.0, 0.5, 1.0});
  const auto noise = NoiseModel::noise_trader(0.4);
  for (double s : {0.0, 0.3, 1.0}) {
    EXPECT_NEAR(gm::eval_h(s, pi, grid, noise), pi.mean(grid), 1e-15);
    EXPECT_NEAR(gm::eval_g(s, pi, grid, noise), pi.mean(grid), 1e-15);
  }
}

TEST(EvalH, LogisticMatchesHandBayes) {
  const Belief pi({0.5, 0.5});
  EXPECT_NEAR(gm::eval_h(0.4, pi, kBinary, kLogistic2), hand_h(0.4, 0.5, 2.0), 1e-12);
  EXPECT_NEAR(gm::eval_g(0.4, pi, kBinary, kLogistic2), hand_g(0.4, 0.5, 2.0), 1e-12);
}

TEST(EvalG, Errors) {
  const Belief pi({0.5, 0.5});
  try {
    gm::eval_g(1.5, pi, kBinary, kLogistic2);
    FAIL();
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::DomainError);
  }
  const auto never_buys = NoiseModel::noise_trader(0.0);
  try {
    gm::eval_g(0.5, pi, kBinary, never_buys);
    FAIL();
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::ZeroBuyProbability);
  }
  try {
    gm::eval_h(0.5, pi, kBinary, NoiseModel::noise_trader(1.0));
    FAIL();
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::ZeroSellProbability);
  }
}

TEST(Solve, DegenerateAndUninformative) {
  EXPECT_EQ(gm::solve_ask(Belief({1.0, 0.0}), kBinary, kLogistic2), 0.0);
  EXPECT_EQ(gm::solve_bid(Belief({0.0, 1.0}), kBinary, kLogistic2), 1.0);
  const auto mix = NoiseModel::noise_trader(0.5);
  EXPECT_NEAR(gm::solve_ask(Belief({0.5, 0.5}), kBinary, mix, 1e-12, true), 0.5, 1e-15);
  EXPECT_NEAR(gm::solve_bid(Belief({0.5, 0.5}), kBinary, mix, 1e-12, true), 0.5, 1e-15);
}

TEST(Solve, MatchesBisectionOracle) {
  const Belief pi({0.5, 0.5});
  const double ask = gm::solve_ask(pi, kBinary, kLogistic2);
  const double bid = gm::solve_bid(pi, kBinary, kLogistic2);
  const double ask_ref = bisect_root([](double s) { return s - hand_g(s, 0.5, 2.0); }, 0.0, 1.0);
  const double bid_ref = bisect_root([](double s) { return s - hand_h(s, 0.5, 2.0); }, 0.0, 1.0);
  EXPECT_NEAR(ask, ask_ref, 1e-10);
  EXPECT_NEAR(bid, bid_ref, 1e-10);
  EXPECT_GT(ask, 0.5);
  EXPECT_LT(bid, 0.5);
}

TEST(Solve, StaticOnlyRefusedWithoutForce) {
  const StateGrid grid({1.0, 3.0});
  const auto noise = NoiseModel::two_point(1.0, 0.5);
  try {
    gm::solve_ask(Belief({0.75, 0.25}), grid, noise);
    FAIL();
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::NotDifferentiable);
  }
  // Forced Picard from the prior mean 1.5 lands on the lower root.
  EXPECT_NEAR(gm::solve_ask(Belief({0.75, 0.25}), grid, noise, 1e-12, true), 1.8, 1e-12);
}

TEST(Solve, ConditionFailureRefused) {
  try {
    gm::StaticSolver(kBinary, NoiseModel::logistic(0.5));
    FAIL();
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::ConditionFailed);
  }
}

TEST(Properties, ContractionInPrice) {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double K = gm::check_gm_condition(kLogistic2, 1.0).K;
  for (int i = 0; i < 1000; ++i) {
    const auto pi = random_belief(gen, 2);
    const double s = u(gen);
    const double t = u(gen);
    const double dg = std::abs(gm::eval_g(s, pi, kBinary, kLogistic2) - gm::eval_g(t, pi, kBinary, kLogistic2));
    const double dh = std::abs(gm::eval_h(s, pi, kBinary, kLogistic2) - gm::eval_h(t, pi, kBinary, kLogistic2));
    ASSERT_LE(dg, (K + 1e-9) * std::abs(s - t));
    ASSERT_LE(dh, (K + 1e-9) * std::abs(s - t));
  }
}

TEST(Properties, LipschitzInBelief) {
  const StateGrid grid({-0.5, 0.0, 0.7});
  const auto noise = NoiseModel::logistic(1.5);
  const double L = gm::contraction_constants(grid, noise, 1.0).L;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(grid.min(), grid.max());
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_belief(gen, 3);
    const auto b = random_belief(gen, 3);
    const double s = u(gen);
    double l1 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) l1 += std::abs(a[k] - b[k]);
    ASSERT_LE(std::abs(gm::eval_g(s, a, grid, noise) - gm::eval_g(s, b, grid, noise)), L * l1 + 1e-9);
  }
}

TEST(Properties, SpreadOrderingAndResidual) {
  const StateGrid grid({0.0, 0.25, 0.6, 1.0});
  const gm::StaticSolver solver(grid, NoiseModel::gaussian(1.5));
  std::mt19937_64 gen(12);
  for (int i = 0; i < 500; ++i) {
    const auto pi = random_belief(gen, 4);
    const auto ask = solver.ask(pi.probs());
    const auto bid = solver.bid(pi.probs());
    const double mean = pi.mean(grid);
    ASSERT_LE(bid.price, mean + 1e-12);
    ASSERT_LE(mean, ask.price + 1e-12);
    ASSERT_LE(std::abs(gm::eval_g(ask.price, pi, grid, solver.noise()) - ask.price), 1e-12);
    ASSERT_LE(std::abs(gm::eval_h(bid.price, pi, grid, solver.noise()) - bid.price), 1e-12);
    ASSERT_LE(ask.iterations, solver.max_iterations());
  }
}

TEST(Properties, IterateErrorRatioBoundedByK) {
  gm::SolverOptions opts;
  opts.record_iterates = true;
  const gm::StaticSolver solver(kBinary, kLogistic2, opts);
  const double K = solver.condition()->K;
  std::mt19937_64 gen(13);
  for (int i = 0; i < 100; ++i) {
    const auto pi = random_belief(gen, 2);
    for (auto side : {gm::Side::Ask, gm::Side::Bid}) {
      const auto fp = solver.solve(side, pi.probs());
      ASSERT_GE(fp.iterates.size(), 2u);
      for (std::size_t k = 0; k + 1 < fp.iterates.size(); ++k) {
        const double e0 = std::abs(fp.iterates[k] - fp.price);
        const double e1 = std::abs(fp.iterates[k + 1] - fp.price);
        if (e0 < 1e-9) break;  // ratios below this are rounding noise
        ASSERT_LE(e1 / e0, K + 1e-6);
      }
    }
  }
}

TEST(Constants, LogisticClosedForm) {
  const auto c = gm::contraction_constants(kBinary, kLogistic2, 1.0);
  const double phi1 = logistic_phi(1.0, 2.0);
  EXPECT_NEAR(c.K, 0.5, 1e-12);
  EXPECT_NEAR(c.M, 1.0 / 8.0, 1e-15);
  EXPECT_NEAR(c.L, 2.0 / (phi1 * phi1), 1e-12);
  EXPECT_NEAR(c.K1, 12.0 * c.L * 2.0 * 1.0 * (1.0 / 8.0), 1e-10);
  EXPECT_NEAR(c.t_star, 0.5 / (2.0 * c.K1), 1e-15);

  const auto d = gm::contraction_constants(kBinary, kLogistic2, 2.0);
  EXPECT_NEAR(d.K1, 2.0 * c.K1, 1e-10);
  EXPECT_NEAR(d.t_star, 0.5 * c.t_star, 1e-15);

  const auto wide = gm::contraction_constants(StateGrid({0.0, 2.0}), NoiseModel::logistic(4.0), 1.0);
  EXPECT_NEAR(wide.K, 0.5, 1e-12);
  const auto wider = gm::check_gm_condition(NoiseModel::logistic(4.0), 2.0);
  EXPECT_NEAR(wider.K, 2.0 * gm::check_gm_condition(NoiseModel::logistic(4.0), 1.0).K, 1e-12);

  EXPECT_TRUE(std::isinf(gm::contraction_constants(kBinary, kLogistic2, 0.0).t_star));
  EXPECT_THROW(gm::contraction_constants(kBinary, NoiseModel::logistic(0.5), 1.0), gm::Error);
}

}  // namespace
