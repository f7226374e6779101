#include "gm/filter.hpp"

#include <algorithm>
#include <cmath>

#include "small_buffer.hpp"

#include "gm/errors.hpp"
#include "gm/kernels.hpp"

namespace gm {

namespace {

using Vec = detail::SmallBuffer<>;

void likelihood(Side side, double price, const StateGrid& grid, const NoiseModel& noise,
                std::span<double> w) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    w[i] = side == Side::Ask ? noise.survival(price - grid[i]) : noise.cdf(price - grid[i]);
}

void jump(Side side, std::span<double> p, double price, const StateGrid& grid,
          const NoiseModel& noise) {
  Vec w(p.size());
  likelihood(side, price, grid, noise, w);
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mass += p[i] * w[i];
  if (!(mass > 0.0)) {
    throw Error(side == Side::Ask ? ErrorCode::ZeroBuyProbability : ErrorCode::ZeroSellProbability,
                "trade has zero likelihood at price " + std::to_string(price));
  }
  kernels::active().reweight(p, w, p);
}

void trade_rates(const Quote& quote, const StateGrid& grid, const NoiseModel& noise,
                 std::span<double> a) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    a[i] = noise.cdf(quote.bid - grid[i]) + noise.survival(quote.ask - grid[i]);
}

}  // namespace

Belief buy_jump(const Belief& pi, double ask, const StateGrid& grid, const NoiseModel& noise) {
  std::vector<double> p(pi.probs().begin(), pi.probs().end());
  jump(Side::Ask, p, ask, grid, noise);
  return Belief::from_weights(std::move(p));
}

Belief sell_jump(const Belief& pi, double bid, const StateGrid& grid, const NoiseModel& noise) {
  std::vector<double> p(pi.probs().begin(), pi.probs().end());
  jump(Side::Bid, p, bid, grid, noise);
  return Belief::from_weights(std::move(p));
}

std::vector<double> drift(const Belief& pi, const Quote& quote, double lambda,
                          const GeneratorMatrix& q, const StateGrid& grid,
                          const NoiseModel& noise) {
  const std::size_t n = grid.size();
  Vec a(n);
  trade_rates(quote, grid, noise, a);
  std::vector<double> out(n);
  kernels::active().drift(pi.probs(), a, q.row_major(), lambda, out);
  return out;
}

FilterDynamics::FilterDynamics(StaticSolver solver, GeneratorMatrix q, double lambda)
    : solver_(std::move(solver)), q_(std::move(q)), lambda_(lambda) {
  if (q_.size() != solver_.grid().size())
    throw Error(ErrorCode::ConfigError, "generator size does not match the state grid");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_))
    throw Error(ErrorCode::ConfigError, "arrival rate must be finite and >= 0");
}

FilterState FilterDynamics::initial_state(const Belief& belief, double t) const {
  FilterState s;
  s.belief.assign(belief.probs().begin(), belief.probs().end());
  s.time = t;
  s.quote = solver_.quote(s.belief);
  return s;
}

void FilterDynamics::drift_at(std::span<const double> p, const Quote& quote,
                              std::span<double> out) const {
  Vec a(p.size());
  trade_rates(quote, grid(), noise(), a);
  kernels::active().drift(p, a, q_.row_major(), lambda_, out);
}

FilterState FilterDynamics::integrate(const FilterState& state, double dt, double max_step,
                                      IntegrationStats* stats,
                                      const StepObserver& observer) const {
  if (!(dt >= 0.0)) throw Error(ErrorCode::DomainError, "dt must be >= 0");
  if (!(max_step > 0.0)) throw Error(ErrorCode::ConfigError, "ODE step must be > 0");
  FilterState cur = state;
  if (dt == 0.0) return cur;

  const auto& k = kernels::active();
  const std::size_t n = cur.belief.size();
  const int steps = std::max(1, static_cast<int>(std::ceil(dt / max_step - 1e-9)));
  const double h = dt / steps;
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n), next(n);

  for (int step = 0; step < steps; ++step) {
    const std::span<const double> y = cur.belief;
    drift_at(y, cur.quote, k1);

    k.axpy(y, 0.5 * h, k1, tmp);
    Quote q2 = solver_.quote(tmp, cur.quote);
    drift_at(tmp, q2, k2);

    k.axpy(y, 0.5 * h, k2, tmp);
    Quote q3 = solver_.quote(tmp, q2);
    drift_at(tmp, q3, k3);

    k.axpy(y, h, k3, tmp);
    Quote q4 = solver_.quote(tmp, q3);
    drift_at(tmp, q4, k4);

    k.rk4_combine(y, k1, k2, k3, k4, h, next);
    const auto renorm = k.clamp_renormalize(next);
    if (stats) {
      stats->min_component_pre_clamp = stats->steps == 0
                                           ? renorm.min_component
                                           : std::min(stats->min_component_pre_clamp,
                                                      renorm.min_component);
      stats->max_sum_deviation = std::max(stats->max_sum_deviation, std::abs(renorm.sum - 1.0));
      ++stats->steps;
    }
    std::copy(next.begin(), next.end(), cur.belief.begin());
    cur.time = step + 1 == steps ? state.time + dt : state.time + (step + 1) * h;
    cur.quote = solver_.quote(cur.belief, q4);
    if (observer) observer(cur);
  }
  return cur;
}

void FilterDynamics::buy_update(std::span<double> p, double price) const {
  jump(Side::Ask, p, price, grid(), noise());
}

void FilterDynamics::sell_update(std::span<double> p, double price) const {
  jump(Side::Bid, p, price, grid(), noise());
}

FilterState integrate_between_events(const FilterState& state, double dt, double lambda,
                                     const GeneratorMatrix& q, const StateGrid& grid,
                                     const NoiseModel& noise, double step, double tol) {
  SolverOptions o;
  o.tol = tol;
  FilterDynamics dyn(StaticSolver(grid, noise, o), q, lambda);
  return dyn.integrate(state, dt, step);
}

}  // namespace gm
