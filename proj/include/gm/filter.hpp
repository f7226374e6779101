#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gm/noise.hpp"
#include "gm/static_equilibrium.hpp"
#include "gm/types.hpp"

namespace gm {

/// Bayes update after a buy at `ask`: p_i Phi(ask - x_i) / sum_j p_j Phi(ask - x_j).
/// Throws Error(ZeroBuyProbability) if no buy was possible.
Belief buy_jump(const Belief& pi, double ask, const StateGrid& grid, const NoiseModel& noise);
/// Bayes update after a sell at `bid`, with Psi in place of Phi.
Belief sell_jump(const Belief& pi, double bid, const StateGrid& grid, const NoiseModel& noise);

/// Right-hand side of the between-trades belief ODE for fixed quotes:
///   dp_i/dt = -lambda p_i a_i + lambda p_i sum_j p_j a_j + sum_j p_j q(j, i),
///   a_i = Psi(bid - x_i) + Phi(ask - x_i).
std::vector<double> drift(const Belief& pi, const Quote& quote, double lambda,
                          const GeneratorMatrix& q, const StateGrid& grid,
                          const NoiseModel& noise);

struct FilterState {
  std::vector<double> belief;
  double time = 0.0;
  Quote quote;  ///< (G(belief), H(belief)) when fresh
};

struct IntegrationStats {
  double min_component_pre_clamp = 0.0;
  double max_sum_deviation = 0.0;  ///< max |sum p - 1| before renormalization
  int steps = 0;
};

/// Called after every accepted step with the updated state.
using StepObserver = std::function<void(const FilterState&)>;

/// Belief dynamics of the equilibrium market maker: quotes are the live fixed points
/// G(p_t), H(p_t), re-solved at every Runge-Kutta stage.
class FilterDynamics {
 public:
  FilterDynamics(StaticSolver solver, GeneratorMatrix q, double lambda);

  const StaticSolver& solver() const noexcept { return solver_; }
  const StateGrid& grid() const noexcept { return solver_.grid(); }
  const NoiseModel& noise() const noexcept { return solver_.noise(); }
  const GeneratorMatrix& generator() const noexcept { return q_; }
  double lambda() const noexcept { return lambda_; }

  /// State at time `t` with fresh quotes for `belief`.
  FilterState initial_state(const Belief& belief, double t = 0.0) const;

  /// Drift with the quotes fixed at `quote`.
  void drift_at(std::span<const double> p, const Quote& quote, std::span<double> out) const;

  /// Advance by dt with classical RK4 on ceil(dt / max_step) equal sub-steps.
  /// Negative components are clamped and the belief renormalized after each step.
  FilterState integrate(const FilterState& state, double dt, double max_step,
                        IntegrationStats* stats = nullptr,
                        const StepObserver& observer = {}) const;

  /// Jump update at a trade; `price` is the quote the trade executed at.
  void buy_update(std::span<double> p, double price) const;
  void sell_update(std::span<double> p, double price) const;

 private:
  StaticSolver solver_;
  GeneratorMatrix q_;
  double lambda_;
};

/// Convenience form of FilterDynamics::integrate.
FilterState integrate_between_events(const FilterState& state, double dt, double lambda,
                                     const GeneratorMatrix& q, const StateGrid& grid,
                                     const NoiseModel& noise, double step, double tol = 1e-12);

}  // namespace gm
