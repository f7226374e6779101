#include "gm/static_equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "small_buffer.hpp"

#include "gm/errors.hpp"
#include "gm/kernels.hpp"

namespace gm {

namespace {

using Weights = detail::SmallBuffer<>;

void check_domain(double s, const StateGrid& grid) {
  if (!(s >= grid.min() && s <= grid.max()))
    throw Error(ErrorCode::DomainError, "price " + std::to_string(s) + " outside [x_min, x_max]");
}

double conditional_mean(Side side, double s, std::span<const double> p, const StateGrid& grid,
                        const NoiseModel& noise) {
  const std::size_t n = grid.size();
  Weights w(n);
  if (side == Side::Ask) {
    for (std::size_t i = 0; i < n; ++i) w[i] = noise.survival(s - grid[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) w[i] = noise.cdf(s - grid[i]);
  }
  const auto sums = kernels::active().weighted_sums(p, w, grid.values());
  if (!(sums.mass > 0.0)) {
    throw Error(side == Side::Ask ? ErrorCode::ZeroBuyProbability : ErrorCode::ZeroSellProbability,
                "no trade possible at price " + std::to_string(s));
  }
  return sums.first_moment / sums.mass;
}

double prior_mean(std::span<const double> p, const StateGrid& grid) {
  double m = 0.0;
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    m += p[i] * grid[i];
    z += p[i];
  }
  return m / z;
}

}  // namespace

double eval_g(double s, std::span<const double> p, const StateGrid& grid, const NoiseModel& noise) {
  check_domain(s, grid);
  return conditional_mean(Side::Ask, s, p, grid, noise);
}

double eval_h(double s, std::span<const double> p, const StateGrid& grid, const NoiseModel& noise) {
  check_domain(s, grid);
  return conditional_mean(Side::Bid, s, p, grid, noise);
}

double eval_g(double s, const Belief& pi, const StateGrid& grid, const NoiseModel& noise) {
  return eval_g(s, pi.probs(), grid, noise);
}

double eval_h(double s, const Belief& pi, const StateGrid& grid, const NoiseModel& noise) {
  return eval_h(s, pi.probs(), grid, noise);
}

StaticSolver::StaticSolver(StateGrid grid, NoiseModel noise, SolverOptions options)
    : grid_(std::move(grid)), noise_(std::move(noise)), options_(options) {
  if (!(options_.tol > 0.0)) throw Error(ErrorCode::ConfigError, "fixed-point tol must be > 0");
  if (noise_.static_only()) {
    if (!options_.force)
      throw Error(ErrorCode::NotDifferentiable,
                  noise_.name() + " noise does not guarantee a unique fixed point; use force");
    max_iterations_ = 10000;
    return;
  }
  condition_ = check_gm_condition(noise_, grid_.width());
  if (!condition_->passes && !options_.force)
    throw Error(ErrorCode::ConditionFailed,
                "contraction condition fails (K = " + std::to_string(condition_->K) + ")");
  const double k = condition_->K;
  int base = 1;
  if (k > 0.0 && k < 1.0) {
    base = static_cast<int>(std::ceil(std::log(options_.tol / grid_.width()) / std::log(k)));
    base = std::max(base, 1);
  } else if (k >= 1.0) {
    base = 10000;
  }
  max_iterations_ = base + options_.iteration_margin;
}

FixedPoint StaticSolver::solve(Side side, std::span<const double> p,
                               std::optional<double> start) const {
  FixedPoint fp;
  double s = start ? *start : prior_mean(p, grid_);
  s = std::clamp(s, grid_.min(), grid_.max());
  if (options_.record_iterates) fp.iterates.push_back(s);
  for (int it = 1; it <= max_iterations_; ++it) {
    const double next =
        std::clamp(conditional_mean(side, s, p, grid_, noise_), grid_.min(), grid_.max());
    if (options_.record_iterates) fp.iterates.push_back(next);
    const double step = std::abs(next - s);
    s = next;
    if (step <= options_.tol) {
      fp.price = s;
      fp.iterations = it;
      fp.residual = std::abs(s - conditional_mean(side, s, p, grid_, noise_));
      return fp;
    }
  }
  throw Error(ErrorCode::NoConvergence, "Picard iteration did not converge in " +
                                            std::to_string(max_iterations_) + " steps");
}

Quote StaticSolver::quote(std::span<const double> p, std::optional<Quote> warm) const {
  Quote q;
  q.ask = solve(Side::Ask, p, warm ? std::optional<double>(warm->ask) : std::nullopt).price;
  q.bid = solve(Side::Bid, p, warm ? std::optional<double>(warm->bid) : std::nullopt).price;
  return q;
}

double solve_ask(const Belief& pi, const StateGrid& grid, const NoiseModel& noise, double tol,
                 bool force) {
  SolverOptions o;
  o.tol = tol;
  o.force = force;
  return StaticSolver(grid, noise, o).ask(pi.probs()).price;
}

double solve_bid(const Belief& pi, const StateGrid& grid, const NoiseModel& noise, double tol,
                 bool force) {
  SolverOptions o;
  o.tol = tol;
  o.force = force;
  return StaticSolver(grid, noise, o).bid(pi.probs()).price;
}

std::vector<double> scan_fixed_points(Side side, const Belief& pi, const StateGrid& grid,
                                      const NoiseModel& noise, int points) {
  points = std::max(points, 3);
  const double lo = grid.min();
  const double hi = grid.max();
  auto residual = [&](double s) { return s - conditional_mean(side, s, pi.probs(), grid, noise); };
  auto at = [&](int k) {
    if (k == points - 1) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  };

  constexpr double kZero = 1e-12;
  constexpr double kAccept = 1e-9;
  std::vector<double> roots;
  auto push = [&](double r) {
    if (roots.empty() || std::abs(r - roots.back()) > 1e-9) roots.push_back(r);
  };

  double s_prev = at(0);
  double f_prev = residual(s_prev);
  if (std::abs(f_prev) <= kZero) push(s_prev);
  for (int k = 1; k < points; ++k) {
    const double s = at(k);
    const double f = residual(s);
    if (std::abs(f) > kZero && std::abs(f_prev) > kZero && (f < 0.0) != (f_prev < 0.0)) {
      double a = s_prev;
      double b = s;
      double fa = f_prev;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = residual(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double r = 0.5 * (a + b);
      if (std::abs(residual(r)) <= kAccept) push(r);
    }
    if (std::abs(f) <= kZero) push(s);
    s_prev = s;
    f_prev = f;
  }
  return roots;
}

ContractionConstants contraction_constants(const StateGrid& grid, const NoiseModel& noise,
                                           double lambda) {
  const ConditionReport r = check_gm_condition(noise, grid.width());
  if (!r.passes)
    throw Error(ErrorCode::ConditionFailed,
                "contraction condition fails (K = " + std::to_string(r.K) + ")");
  ContractionConstants c;
  c.K = r.K;
  c.M = r.M;
  c.L = 2.0 * grid.max_abs() / (r.phi_at_C * r.phi_at_C);
  c.K1 = 12.0 * c.L * static_cast<double>(grid.size()) * lambda * c.M;
  c.t_star = c.K1 > 0.0 ? (1.0 - c.K) / (2.0 * c.K1) : std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace gm
