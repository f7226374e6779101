#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gm/filter.hpp"
#include "gm/noise.hpp"
#include "gm/rng.hpp"
#include "gm/types.hpp"

namespace gm {

struct MarketModel {
  StateGrid grid;
  GeneratorMatrix q;
  double lambda;
  NoiseModel noise;
  Belief initial_belief;

  /// Structural checks (sizes, rate sign). Does not run the condition check.
  void validate() const;
  friend bool operator==(const MarketModel&, const MarketModel&) = default;
};

/// Right-continuous piecewise-constant path of state indices.
struct TruePath {
  std::vector<double> jump_times;  ///< jump_times[0] == 0
  std::vector<std::size_t> states;

  std::size_t state_at(double t) const;
};

enum class Outcome { Buy, Sell, NoTrade };
std::string_view to_string(Outcome o) noexcept;

struct EventRecord {
  double time = 0.0;
  std::size_t state = 0;
  double true_value = 0.0;
  double epsilon = 0.0;
  double valuation = 0.0;
  Quote quote;
  Outcome outcome = Outcome::NoTrade;
  std::vector<double> belief_before;
  std::vector<double> belief_after;
  double profit = 0.0;  ///< ask - X on a buy, bid - X on a sell, 0 otherwise
};

struct TrajectoryPoint {
  double time = 0.0;
  std::vector<double> belief;
  Quote quote;
};

struct PathDiagnostics {
  double min_component_pre_clamp = 0.0;
  double max_sum_deviation = 0.0;
  int ode_steps = 0;
  int degenerate_spreads = 0;  ///< arrivals quoted with ask == bid
};

struct PathRecord {
  std::uint64_t seed = 0;
  double horizon = 0.0;
  TruePath true_path;
  std::vector<EventRecord> events;
  std::size_t n_buys = 0;
  std::size_t n_sells = 0;
  double buy_profit_sum = 0.0;   ///< sum over buys of (ask - X)
  double sell_profit_sum = 0.0;  ///< sum over sells of (bid - X)
  /// Belief and quotes at t = 0, after every ODE step and after every jump (empty unless
  /// SimConfig::record_trajectory).
  std::vector<TrajectoryPoint> trajectory;
  /// Beliefs at multiples of SimConfig::sample_interval (empty when the interval is 0).
  std::vector<double> sample_times;
  std::vector<std::vector<double>> samples;
  PathDiagnostics diagnostics;
};

struct SimConfig {
  double ode_step = 0.01;
  double fp_tol = 1e-12;
  /// Added to every ask (capped at x_n); negative control for the zero-profit test.
  double perturb_ask = 0.0;
  bool record_trajectory = false;
  double sample_interval = 0.0;
  /// Starting belief override (used by the uniqueness diagnostic); empty = model's.
  std::vector<double> initial_belief_override;
};

TruePath sample_ctmc_path(const GeneratorMatrix& q, const Belief& initial, double horizon,
                          Rng& rng);
std::vector<double> sample_arrivals(double lambda, double horizon, Rng& rng);

/// Buy iff valuation >= ask; else sell iff valuation <= bid.
Outcome decide_trade(double valuation, const Quote& quote) noexcept;

double buy_intensity(const Quote& quote, double x, double lambda, const NoiseModel& noise) noexcept;
double sell_intensity(const Quote& quote, double x, double lambda, const NoiseModel& noise) noexcept;

/// Event-driven construction of the equilibrium price path for one seed.
///
/// The three model primitives come from independent streams derived from `seed`.
/// Between arrivals the belief follows FilterDynamics::integrate; at an arrival the
/// quote is (G, H) of the pre-arrival belief, the trade is decided from the true value
/// plus noise, and the matching Bayes jump is applied. The true-value path is read only
/// to decide trades and book profits.
///
/// Throws Error(ConditionFailed) if the model fails the existence/uniqueness condition.
PathRecord simulate_gmps_path(const MarketModel& model, double horizon, const SimConfig& config,
                              std::uint64_t seed);

/// Same, reusing prebuilt dynamics (avoids re-running the condition check per path).
PathRecord simulate_gmps_path(const MarketModel& model, const FilterDynamics& dynamics,
                              double horizon, const SimConfig& config, std::uint64_t seed);

FilterDynamics make_dynamics(const MarketModel& model, double fp_tol);

/// Paths for seeds seed, seed+1, ..., seed+n-1, computed on `workers` threads;
/// result order is by seed offset regardless of scheduling.
std::vector<PathRecord> simulate_batch(const MarketModel& model, double horizon,
                                       const SimConfig& config, std::uint64_t seed,
                                       std::size_t n_paths, unsigned workers = 0);

}  // namespace gm
