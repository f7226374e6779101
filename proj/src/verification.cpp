#include "gm/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "gm/errors.hpp"
#include "gm/static_equilibrium.hpp"

// Everything in this file is deliberately independent of the engine's integrator:
// no FilterDynamics, no drift(), no kernels. The oracle filter only shares the noise
// functions and the logged path with the code it checks.

namespace gm {

namespace {

using Matrix = std::vector<double>;

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t n) {
  Matrix c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  return c;
}

void normalize(std::vector<double>& p) {
  double z = 0.0;
  for (double v : p) z += v;
  for (double& v : p) v /= z;
}

struct QuotePath {
  std::vector<double> times;
  std::vector<Quote> quotes;

  Quote at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    if (i + 1 < times.size() && times[i + 1] > times[i]) {
      const double w = (t - times[i]) / (times[i + 1] - times[i]);
      return {quotes[i].ask + w * (quotes[i + 1].ask - quotes[i].ask),
              quotes[i].bid + w * (quotes[i + 1].bid - quotes[i].bid)};
    }
    return quotes[i];
  }
};

}  // namespace

std::vector<double> matrix_exponential(const GeneratorMatrix& q, double t, int terms) {
  const std::size_t n = q.size();
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(q(i, j));
    norm = std::max(norm, row);
  }
  norm *= std::abs(t);
  int squarings = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = t / std::ldexp(1.0, squarings);

  Matrix a(n * n);
  for (std::size_t i = 0; i < n * n; ++i) a[i] = q.row_major()[i] * scale;
  Matrix result(n * n, 0.0);
  Matrix term(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) result[i * n + i] = term[i * n + i] = 1.0;
  for (int k = 1; k < terms; ++k) {
    term = multiply(term, a, n);
    for (double& v : term) v /= k;
    for (std::size_t i = 0; i < n * n; ++i) result[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result, n);
  return result;
}

BeliefPath oracle_filter(const PathRecord& path, const MarketModel& model,
                         const OracleFilterConfig& cfg, std::span<const double> sample_times) {
  if (!(cfg.h > 0.0)) throw Error(ErrorCode::ConfigError, "oracle step must be > 0");
  if (cfg.matrix_exp_terms < 8) throw Error(ErrorCode::ConfigError, "need >= 8 series terms");
  if (path.trajectory.empty())
    throw Error(ErrorCode::InsufficientData, "oracle needs the logged quote trajectory");

  const std::size_t n = model.grid.size();
  const double horizon = path.horizon;
  const double h = cfg.h;
  const auto total_steps = static_cast<long>(std::ceil(horizon / h - 1e-9));

  std::vector<long> sample_steps;
  for (double ts : sample_times) {
    const double k = ts / h;
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-6 || kr < 0 || static_cast<long>(kr) > total_steps)
      throw Error(ErrorCode::GridMismatch,
                  "sample time " + std::to_string(ts) + " is not on the oracle grid");
    sample_steps.push_back(static_cast<long>(kr));
  }

  QuotePath quotes;
  for (const auto& pt : path.trajectory) {
    quotes.times.push_back(pt.time);
    quotes.quotes.push_back(pt.quote);
  }

  std::vector<const EventRecord*> trades;
  for (const auto& ev : path.events)
    if (ev.outcome != Outcome::NoTrade) trades.push_back(&ev);

  const Matrix full_step = matrix_exponential(model.q, h, cfg.matrix_exp_terms);
  std::vector<double> p = path.trajectory.front().belief;
  std::vector<double> tmp(n);

  auto propagate = [&](double a, double b) {
    const double dt = b - a;
    if (dt <= 0.0) return;
    const Matrix partial =
        std::abs(dt - h) <= 1e-9 * h ? Matrix{} : matrix_exponential(model.q, dt, cfg.matrix_exp_terms);
    const Matrix& trans = partial.empty() ? full_step : partial;
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) tmp[i] += p[j] * trans[j * n + i];
    const Quote qm = quotes.at(0.5 * (a + b));
    for (std::size_t i = 0; i < n; ++i) {
      const double rate = model.noise.survival(qm.ask - model.grid[i]) +
                          model.noise.cdf(qm.bid - model.grid[i]);
      p[i] = tmp[i] * std::exp(-model.lambda * rate * dt);
    }
    normalize(p);
  };

  auto bayes = [&](const EventRecord& ev) {
    for (std::size_t i = 0; i < n; ++i) {
      const double like = ev.outcome == Outcome::Buy
                              ? model.noise.survival(ev.quote.ask - model.grid[i])
                              : model.noise.cdf(ev.quote.bid - model.grid[i]);
      p[i] *= like;
    }
    normalize(p);
  };

  BeliefPath out;
  std::vector<std::size_t> order(sample_steps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sample_steps[a] < sample_steps[b]; });
  std::vector<std::vector<double>> recorded(sample_steps.size());
  std::size_t next_sample = 0;
  std::size_t next_trade = 0;

  for (long k = 0; k <= total_steps; ++k) {
    while (next_sample < order.size() && sample_steps[order[next_sample]] == k) {
      recorded[order[next_sample]] = p;
      ++next_sample;
    }
    if (k == total_steps) break;
    const double t0 = static_cast<double>(k) * h;
    const double t1 = k + 1 == total_steps ? horizon : static_cast<double>(k + 1) * h;
    double a = t0;
    while (next_trade < trades.size() &&
           (trades[next_trade]->time < t1 || (k + 1 == total_steps && trades[next_trade]->time <= t1))) {
      const EventRecord& ev = *trades[next_trade++];
      propagate(a, ev.time);
      bayes(ev);
      a = ev.time;
    }
    propagate(a, t1);
  }

  out.times.assign(sample_times.begin(), sample_times.end());
  out.beliefs = std::move(recorded);
  return out;
}

BeliefPath engine_belief_path(const PathRecord& path) {
  return {path.sample_times, path.samples};
}

double compare_filters(const BeliefPath& a, const BeliefPath& b) {
  if (a.times.size() != b.times.size() || a.beliefs.size() != a.times.size() ||
      b.beliefs.size() != b.times.size())
    throw Error(ErrorCode::GridMismatch, "belief paths have different lengths");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    if (std::abs(a.times[k] - b.times[k]) > 1e-9)
      throw Error(ErrorCode::GridMismatch, "belief paths sampled at different times");
    if (a.beliefs[k].size() != b.beliefs[k].size())
      throw Error(ErrorCode::GridMismatch, "belief dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.beliefs[k].size(); ++i)
      d += std::abs(a.beliefs[k][i] - b.beliefs[k][i]);
    worst = std::max(worst, d);
  }
  return worst;
}

namespace {

struct SideTotals {
  std::size_t buys = 0;
  std::size_t sells = 0;
  double buy_sum = 0.0;
  double sell_sum = 0.0;
};

ZeroProfitReport zero_profit_from_totals(const std::vector<SideTotals>& per_path) {
  ZeroProfitReport r;
  r.n_paths = per_path.size();
  double buy_total = 0.0;
  double sell_total = 0.0;
  for (const auto& p : per_path) {
    r.n_buys += p.buys;
    r.n_sells += p.sells;
    buy_total += p.buy_sum;
    sell_total += p.sell_sum;
  }
  if (r.n_paths < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 paths");
  if (r.n_buys == 0 || r.n_sells == 0)
    throw Error(ErrorCode::InsufficientData, "need trades on both sides (buys " +
                                                 std::to_string(r.n_buys) + ", sells " +
                                                 std::to_string(r.n_sells) + ")");
  r.buy_mean = buy_total / static_cast<double>(r.n_buys);
  r.sell_mean = sell_total / static_cast<double>(r.n_sells);

  // Ratio-estimator variance with paths as clusters.
  double buy_ss = 0.0;
  double sell_ss = 0.0;
  for (const auto& p : per_path) {
    const double eb = p.buy_sum - r.buy_mean * static_cast<double>(p.buys);
    const double es = p.sell_sum - r.sell_mean * static_cast<double>(p.sells);
    buy_ss += eb * eb;
    sell_ss += es * es;
  }
  const double m = static_cast<double>(r.n_paths);
  const double correction = m / (m - 1.0);
  r.buy_se = std::sqrt(correction * buy_ss) / static_cast<double>(r.n_buys);
  r.sell_se = std::sqrt(correction * sell_ss) / static_cast<double>(r.n_sells);
  r.z_buy = r.buy_se > 0.0 ? r.buy_mean / r.buy_se : 0.0;
  r.z_sell = r.sell_se > 0.0 ? r.sell_mean / r.sell_se : 0.0;
  r.pass = std::abs(r.z_buy) <= 3.0 && std::abs(r.z_sell) <= 3.0;
  return r;
}

}  // namespace

ZeroProfitReport zero_profit_test(std::span<const PathRecord> paths) {
  std::vector<SideTotals> totals;
  totals.reserve(paths.size());
  for (const auto& p : paths) totals.push_back({p.n_buys, p.n_sells, p.buy_profit_sum, p.sell_profit_sum});
  return zero_profit_from_totals(totals);
}

ZeroProfitReport zero_profit_test_first_trades(std::span<const PathRecord> paths,
                                               std::size_t max_trades) {
  std::vector<SideTotals> totals;
  totals.reserve(paths.size());
  for (const auto& p : paths) {
    SideTotals t;
    for (const auto& ev : p.events) {
      if (t.buys + t.sells >= max_trades) break;
      if (ev.outcome == Outcome::Buy) {
        ++t.buys;
        t.buy_sum += ev.profit;
      } else if (ev.outcome == Outcome::Sell) {
        ++t.sells;
        t.sell_sum += ev.profit;
      }
    }
    totals.push_back(t);
  }
  return zero_profit_from_totals(totals);
}

ChiSquareResult poisson_chi_square(std::span<const long> counts, double mean, double alpha) {
  ChiSquareResult r;
  r.expected_mean = mean;
  r.evaluated = true;
  const double n = static_cast<double>(counts.size());
  if (counts.size() < 10 || !(mean > 0.0))
    throw Error(ErrorCode::InsufficientData, "chi-square needs >= 10 trials and a positive mean");
  r.observed_mean =
      std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());

  const boost::math::poisson_distribution<double> pois(mean);
  const int target_bins = static_cast<int>(std::clamp(n / 5.0, 2.0, 30.0));
  const double per_bin = 1.0 / target_bins;

  // Bins [lower_k, lower_{k+1}); the last is open-ended.
  std::vector<long> lower{0};
  std::vector<double> prob;
  double acc = 0.0;
  double cumulative = 0.0;
  const long k_max = static_cast<long>(mean + 40.0 * std::sqrt(mean) + 50.0);
  for (long k = 0; k <= k_max; ++k) {
    const double pk = boost::math::pdf(pois, static_cast<double>(k));
    acc += pk;
    cumulative += pk;
    if (acc >= per_bin && 1.0 - cumulative >= per_bin) {
      prob.push_back(acc);
      lower.push_back(k + 1);
      acc = 0.0;
    }
  }
  prob.push_back(1.0 - std::accumulate(prob.begin(), prob.end(), 0.0));
  while (prob.size() > 1 && prob.back() * n < 5.0) {
    const double tail = prob.back();
    prob.pop_back();
    lower.pop_back();
    prob.back() += tail;
  }
  while (prob.size() > 1 && prob.front() * n < 5.0) {
    prob[1] += prob[0];
    prob.erase(prob.begin());
    lower.erase(lower.begin() + 1);
  }

  std::vector<double> observed(prob.size(), 0.0);
  for (long c : counts) {
    const auto it = std::upper_bound(lower.begin(), lower.end(), c);
    observed[static_cast<std::size_t>(it - lower.begin()) - 1] += 1.0;
  }
  for (std::size_t b = 0; b < prob.size(); ++b) {
    const double e = n * prob[b];
    r.statistic += (observed[b] - e) * (observed[b] - e) / e;
  }
  r.dof = static_cast<int>(prob.size()) - 1;
  if (r.dof < 1) throw Error(ErrorCode::InsufficientData, "too few bins for chi-square");
  const boost::math::chi_squared_distribution<double> chi(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(chi, r.statistic));
  r.pass = r.p_value >= alpha;
  return r;
}

IntensityReport intensity_test(const MarketModel& model, const Quote& quote, std::size_t state,
                               double horizon, std::size_t n_trials, std::uint64_t seed,
                               double alpha) {
  const double x = model.grid[state];
  const double buy_mean = buy_intensity(quote, x, model.lambda, model.noise) * horizon;
  const double sell_mean = sell_intensity(quote, x, model.lambda, model.noise) * horizon;
  if (buy_mean < 20.0)
    throw Error(ErrorCode::InsufficientData,
                "expected buy count " + std::to_string(buy_mean) + " < 20");

  Rng arrivals(seed, Stream::Arrivals);
  Rng noise(seed, Stream::Noise);
  std::vector<long> buys(n_trials, 0);
  std::vector<long> sells(n_trials, 0);
  for (std::size_t k = 0; k < n_trials; ++k) {
    for (double t = arrivals.exponential(model.lambda); t <= horizon;
         t += arrivals.exponential(model.lambda)) {
      switch (decide_trade(x + model.noise.sample(noise), quote)) {
        case Outcome::Buy: ++buys[k]; break;
        case Outcome::Sell: ++sells[k]; break;
        case Outcome::NoTrade: break;
      }
    }
  }

  IntensityReport r;
  r.buys = poisson_chi_square(buys, buy_mean, alpha);
  if (sell_mean >= 20.0) {
    r.sells = poisson_chi_square(sells, sell_mean, alpha);
  } else {
    r.sells.expected_mean = sell_mean;
    r.sells.evaluated = false;
    r.sells.pass = true;
  }
  r.pass = r.buys.pass && r.sells.pass;
  return r;
}

QuoteConsistency quote_consistency(std::span<const PathRecord> paths, const StateGrid& grid) {
  QuoteConsistency r;
  for (const auto& p : paths) {
    for (const auto& ev : p.events) {
      if (ev.outcome == Outcome::NoTrade) continue;
      double mean = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) mean += grid[i] * ev.belief_after[i];
      const double price = ev.outcome == Outcome::Buy ? ev.quote.ask : ev.quote.bid;
      r.max_deviation = std::max(r.max_deviation, std::abs(price - mean));
      ++r.n_trades;
    }
  }
  return r;
}

SimplexReport simplex_check(std::span<const PathRecord> paths, const StateGrid& grid) {
  SimplexReport r;
  r.min_component = 1.0;
  r.min_pre_clamp = 1.0;
  auto visit = [&](const std::vector<double>& b) {
    double sum = 0.0;
    for (double v : b) {
      sum += v;
      r.min_component = std::min(r.min_component, v);
    }
    r.max_sum_deviation = std::max(r.max_sum_deviation, std::abs(sum - 1.0));
    ++r.n_beliefs;
  };
  auto spread = [&](const std::vector<double>& b, const Quote& q) {
    double mean = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) mean += grid[i] * b[i];
    r.max_spread_violation = std::max({r.max_spread_violation, q.bid - mean, mean - q.ask});
  };
  for (const auto& p : paths) {
    r.min_pre_clamp = std::min(r.min_pre_clamp, p.diagnostics.min_component_pre_clamp);
    for (const auto& ev : p.events) {
      visit(ev.belief_before);
      visit(ev.belief_after);
      spread(ev.belief_before, ev.quote);
    }
    for (const auto& pt : p.trajectory) {
      visit(pt.belief);
      spread(pt.belief, pt.quote);
    }
    for (const auto& s : p.samples) visit(s);
  }
  return r;
}

UniquenessReport uniqueness_diagnostic(const MarketModel& model, double horizon,
                                       const SimConfig& config, std::uint64_t seed,
                                       const Belief& belief_a, const Belief& belief_b) {
  UniquenessReport r;
  r.constants = contraction_constants(model.grid, model.noise, model.lambda);

  SimConfig ca = config;
  ca.initial_belief_override.assign(belief_a.probs().begin(), belief_a.probs().end());
  SimConfig cb = config;
  cb.initial_belief_override.assign(belief_b.probs().begin(), belief_b.probs().end());
  const PathRecord a = simulate_gmps_path(model, horizon, ca, seed);
  const PathRecord b = simulate_gmps_path(model, horizon, cb, seed);

  const FilterDynamics dyn = make_dynamics(model, config.fp_tol);
  const StaticSolver& solver = dyn.solver();
  const Quote qa = solver.quote(belief_a.probs());
  const Quote qb = solver.quote(belief_b.probs());
  r.initial_difference = std::max(std::abs(qa.ask - qb.ask), std::abs(qa.bid - qb.bid));

  const std::size_t m = std::min(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < m; ++i) {
    r.times.push_back(a.events[i].time);
    r.quote_difference.push_back(std::max(std::abs(a.events[i].quote.ask - b.events[i].quote.ask),
                                          std::abs(a.events[i].quote.bid - b.events[i].quote.bid)));
  }
  r.final_difference = r.quote_difference.empty() ? r.initial_difference : r.quote_difference.back();
  return r;
}

}  // namespace gm
