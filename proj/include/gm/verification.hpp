#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gm/market_sim.hpp"

namespace gm {

struct OracleFilterConfig {
  double h = 1e-3;
  int matrix_exp_terms = 16;
};

struct BeliefPath {
  std::vector<double> times;
  std::vector<std::vector<double>> beliefs;
};

/// exp(q t) by a truncated Taylor series with `terms` terms after scaling so that
/// ||q t|| <= 1/2, followed by repeated squaring. Row-major result.
std::vector<double> matrix_exponential(const GeneratorMatrix& q, double t, int terms);

/// Independent split-step discretization of the belief filter driven by the logged
/// quote path and trades of `path` (which must carry a trajectory).
///
/// Per step of length h: chain transition by exp(q h), then multiplication by the
/// no-trade likelihood exp(-lambda [Phi(ask - x_i) + Psi(bid - x_i)] h) with quotes
/// taken from the logged path at the step midpoint, then renormalization. Steps are
/// split at trade times, where the exact Bayes jump at the logged quote is applied.
/// Returns beliefs at `sample_times`, each of which must be a multiple of h
/// (Error(GridMismatch) otherwise). A sample coinciding with an event time is taken
/// before the jump.
BeliefPath oracle_filter(const PathRecord& path, const MarketModel& model,
                         const OracleFilterConfig& cfg, std::span<const double> sample_times);

/// The engine's own samples as a BeliefPath.
BeliefPath engine_belief_path(const PathRecord& path);

/// max_t sum_i |a_i(t) - b_i(t)|. Error(GridMismatch) unless the time grids agree.
double compare_filters(const BeliefPath& a, const BeliefPath& b);

struct ZeroProfitReport {
  std::size_t n_paths = 0;
  std::size_t n_buys = 0;
  std::size_t n_sells = 0;
  double buy_mean = 0.0;
  double buy_se = 0.0;
  double sell_mean = 0.0;
  double sell_se = 0.0;
  double z_buy = 0.0;
  double z_sell = 0.0;
  bool pass = false;
};

/// Side-separated per-trade profit means with path-clustered standard errors
/// (trades inside one path share the true-value path, so paths are the independent
/// units). pass = |z_buy| <= 3 and |z_sell| <= 3.
/// Error(InsufficientData) with fewer than 2 paths or no trades on some side.
ZeroProfitReport zero_profit_test(std::span<const PathRecord> paths);

/// Same test stopped at min(T, time of the k-th trade) on each path instead of at T.
/// Needs the per-event log.
ZeroProfitReport zero_profit_test_first_trades(std::span<const PathRecord> paths,
                                               std::size_t max_trades);

struct ChiSquareResult {
  double expected_mean = 0.0;
  double observed_mean = 0.0;
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  bool evaluated = false;  ///< false when the side lacks power (expected count < 20)
  bool pass = false;
};

/// Chi-square goodness of fit of integer counts against Poisson(mean) at level alpha,
/// using bins of roughly equal probability with expected frequency >= 5.
ChiSquareResult poisson_chi_square(std::span<const long> counts, double mean, double alpha = 0.01);

struct IntensityReport {
  ChiSquareResult buys;
  ChiSquareResult sells;
  bool pass = false;
};

/// Trade counts over [0, T] against a frozen quote with the true value frozen at
/// state `state`, over n_trials independent runs, compared with Poisson(lambda Phi(ask - x) T)
/// (buys) and Poisson(lambda Psi(bid - x) T) (sells).
/// Error(InsufficientData) if lambda Phi(ask - x) T < 20.
IntensityReport intensity_test(const MarketModel& model, const Quote& quote, std::size_t state,
                               double horizon, std::size_t n_trials, std::uint64_t seed,
                               double alpha = 0.01);

struct QuoteConsistency {
  std::size_t n_trades = 0;
  double max_deviation = 0.0;  ///< max |price - posterior mean after the jump|
};
QuoteConsistency quote_consistency(std::span<const PathRecord> paths, const StateGrid& grid);

struct SimplexReport {
  std::size_t n_beliefs = 0;
  double max_sum_deviation = 0.0;
  double min_component = 0.0;      ///< over logged beliefs
  double min_pre_clamp = 0.0;      ///< over ODE steps
  double max_spread_violation = 0.0;  ///< max(bid - mean, mean - ask, 0) over logged rows
};
SimplexReport simplex_check(std::span<const PathRecord> paths, const StateGrid& grid);

struct UniquenessReport {
  ContractionConstants constants;
  std::vector<double> times;             ///< arrival times of the reference run
  std::vector<double> quote_difference;  ///< max(|dAsk|, |dBid|) at those times
  double initial_difference = 0.0;
  double final_difference = 0.0;
};

/// Constants K, K1, t* plus two engine runs sharing every random stream, started from
/// `belief_a` and `belief_b`.
UniquenessReport uniqueness_diagnostic(const MarketModel& model, double horizon,
                                       const SimConfig& config, std::uint64_t seed,
                                       const Belief& belief_a, const Belief& belief_b);

}  // namespace gm
