#include "gm/market_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "gm/errors.hpp"

namespace gm {

void MarketModel::validate() const {
  const std::size_t n = grid.size();
  if (q.size() != n) throw Error(ErrorCode::ConfigError, "generator size does not match states");
  if (initial_belief.size() != n)
    throw Error(ErrorCode::ConfigError, "initial belief size does not match states");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::ConfigError, "lambda must be finite and >= 0");
}

std::size_t TruePath::state_at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - jump_times.begin() - 1));
  return states[idx];
}

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Buy: return "Buy";
    case Outcome::Sell: return "Sell";
    case Outcome::NoTrade: return "NoTrade";
  }
  return "NoTrade";
}

namespace {

std::size_t draw_categorical(std::span<const double> weights, double total, Rng& rng) {
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

TruePath sample_ctmc_path(const GeneratorMatrix& q, const Belief& initial, double horizon,
                          Rng& rng) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::DomainError, "horizon must be > 0");
  const std::size_t n = q.size();
  TruePath path;
  std::size_t state = draw_categorical(initial.probs(), 1.0, rng);
  double t = 0.0;
  path.jump_times.push_back(0.0);
  path.states.push_back(state);
  std::vector<double> rates(n);
  while (true) {
    const double exit = q.exit_rate(state);
    if (exit <= 0.0) break;
    t += rng.exponential(exit);
    if (t > horizon) break;
    for (std::size_t j = 0; j < n; ++j) rates[j] = j == state ? 0.0 : q(state, j);
    state = draw_categorical(rates, exit, rng);
    path.jump_times.push_back(t);
    path.states.push_back(state);
  }
  return path;
}

std::vector<double> sample_arrivals(double lambda, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::DomainError, "horizon must be > 0");
  std::vector<double> times;
  if (!(lambda > 0.0)) return times;
  double t = 0.0;
  while (true) {
    t += rng.exponential(lambda);
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

Outcome decide_trade(double valuation, const Quote& quote) noexcept {
  if (valuation >= quote.ask) return Outcome::Buy;
  if (valuation <= quote.bid) return Outcome::Sell;
  return Outcome::NoTrade;
}

double buy_intensity(const Quote& quote, double x, double lambda, const NoiseModel& noise) noexcept {
  return lambda * noise.survival(quote.ask - x);
}

double sell_intensity(const Quote& quote, double x, double lambda, const NoiseModel& noise) noexcept {
  return lambda * noise.cdf(quote.bid - x);
}

FilterDynamics make_dynamics(const MarketModel& model, double fp_tol) {
  model.validate();
  if (model.noise.static_only())
    throw Error(ErrorCode::ConditionFailed,
                model.noise.name() + " noise cannot drive the dynamic engine");
  SolverOptions o;
  o.tol = fp_tol;
  return FilterDynamics(StaticSolver(model.grid, model.noise, o), model.q, model.lambda);
}

PathRecord simulate_gmps_path(const MarketModel& model, double horizon, const SimConfig& config,
                              std::uint64_t seed) {
  const FilterDynamics dyn = make_dynamics(model, config.fp_tol);
  return simulate_gmps_path(model, dyn, horizon, config, seed);
}

PathRecord simulate_gmps_path(const MarketModel& model, const FilterDynamics& dyn, double horizon,
                              const SimConfig& config, std::uint64_t seed) {
  Rng value_rng(seed, Stream::TrueValue);
  Rng arrival_rng(seed, Stream::Arrivals);
  Rng noise_rng(seed, Stream::Noise);

  PathRecord rec;
  rec.seed = seed;
  rec.horizon = horizon;
  rec.true_path = sample_ctmc_path(model.q, model.initial_belief, horizon, value_rng);
  const std::vector<double> arrivals = sample_arrivals(model.lambda, horizon, arrival_rng);

  const StateGrid& grid = model.grid;
  const Belief start = config.initial_belief_override.empty()
                           ? model.initial_belief
                           : Belief(config.initial_belief_override);
  FilterState state = dyn.initial_state(start, 0.0);

  IntegrationStats stats;
  StepObserver observer;
  if (config.record_trajectory) {
    rec.trajectory.push_back({state.time, state.belief, state.quote});
    observer = [&rec](const FilterState& s) { rec.trajectory.push_back({s.time, s.belief, s.quote}); };
  }

  std::size_t next_sample = 0;
  std::size_t sample_count = 0;
  if (config.sample_interval > 0.0)
    sample_count = static_cast<std::size_t>(std::floor(horizon / config.sample_interval + 1e-9)) + 1;
  auto sample_time = [&](std::size_t k) { return static_cast<double>(k) * config.sample_interval; };
  auto advance_to = [&](double t) {
    // Samples at or before t are recorded on the way (pre-event when equal to t).
    while (next_sample < sample_count && sample_time(next_sample) <= t) {
      const double ts = sample_time(next_sample);
      state = dyn.integrate(state, ts - state.time, config.ode_step, &stats, observer);
      rec.sample_times.push_back(ts);
      rec.samples.push_back(state.belief);
      ++next_sample;
    }
    state = dyn.integrate(state, t - state.time, config.ode_step, &stats, observer);
  };

  rec.events.reserve(arrivals.size());
  for (const double tau : arrivals) {
    advance_to(tau);

    EventRecord ev;
    ev.time = tau;
    ev.state = rec.true_path.state_at(tau);
    ev.true_value = grid[ev.state];
    ev.epsilon = model.noise.sample(noise_rng);
    ev.valuation = ev.true_value + ev.epsilon;
    ev.quote = state.quote;
    if (config.perturb_ask != 0.0)
      ev.quote.ask = std::clamp(ev.quote.ask + config.perturb_ask, grid.min(), grid.max());
    if (ev.quote.ask == ev.quote.bid) ++rec.diagnostics.degenerate_spreads;
    ev.outcome = decide_trade(ev.valuation, ev.quote);
    ev.belief_before = state.belief;

    switch (ev.outcome) {
      case Outcome::Buy:
        dyn.buy_update(state.belief, ev.quote.ask);
        ev.profit = ev.quote.ask - ev.true_value;
        rec.buy_profit_sum += ev.profit;
        ++rec.n_buys;
        break;
      case Outcome::Sell:
        dyn.sell_update(state.belief, ev.quote.bid);
        ev.profit = ev.quote.bid - ev.true_value;
        rec.sell_profit_sum += ev.profit;
        ++rec.n_sells;
        break;
      case Outcome::NoTrade:
        break;
    }
    ev.belief_after = state.belief;
    if (ev.outcome != Outcome::NoTrade) {
      state.quote = dyn.solver().quote(state.belief, state.quote);
      if (config.record_trajectory) rec.trajectory.push_back({tau, state.belief, state.quote});
    }
    rec.events.push_back(std::move(ev));
  }
  advance_to(horizon);

  rec.diagnostics.min_component_pre_clamp =
      stats.steps > 0 ? stats.min_component_pre_clamp
                      : *std::min_element(start.probs().begin(), start.probs().end());
  rec.diagnostics.max_sum_deviation = stats.max_sum_deviation;
  rec.diagnostics.ode_steps = stats.steps;
  return rec;
}

std::vector<PathRecord> simulate_batch(const MarketModel& model, double horizon,
                                       const SimConfig& config, std::uint64_t seed,
                                       std::size_t n_paths, unsigned workers) {
  const FilterDynamics dyn = make_dynamics(model, config.fp_tol);
  std::vector<PathRecord> out(n_paths);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_paths)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n_paths; i = next++) {
      try {
        out[i] = simulate_gmps_path(model, dyn, horizon, config, seed + i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace gm
