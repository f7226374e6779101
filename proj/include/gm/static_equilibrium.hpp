#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gm/noise.hpp"
#include "gm/types.hpp"

namespace gm {

/// g(s, p) = E[X | X + eps >= s] for s in [x_1, x_n].
/// Throws Error(ZeroBuyProbability) if the buy probability is 0, Error(DomainError) if s is
/// outside the grid range.
double eval_g(double s, const Belief& pi, const StateGrid& grid, const NoiseModel& noise);
/// h(s, p) = E[X | X + eps <= s].
double eval_h(double s, const Belief& pi, const StateGrid& grid, const NoiseModel& noise);

// Span forms used on the hot path; `p` need not be exactly normalized.
double eval_g(double s, std::span<const double> p, const StateGrid& grid, const NoiseModel& noise);
double eval_h(double s, std::span<const double> p, const StateGrid& grid, const NoiseModel& noise);

enum class Side { Ask, Bid };

struct SolverOptions {
  double tol = 1e-12;
  /// Allow static-only (discrete) noise, where uniqueness is not guaranteed.
  bool force = false;
  int iteration_margin = 100;
  bool record_iterates = false;
};

struct FixedPoint {
  double price = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< |price - g(price)|
  std::vector<double> iterates;  ///< s_0, s_1, ... when requested
};

/// Picard iteration s <- g(s, p) (or h) for the static zero-profit quotes G(p), H(p).
///
/// Construction checks the existence/uniqueness condition once for the grid
/// width; solves are then cheap and const. With continuous noise the condition
/// must pass (Error(ConditionFailed) otherwise). Static-only noise is refused
/// with Error(NotDifferentiable) unless options.force is set.
class StaticSolver {
 public:
  StaticSolver(StateGrid grid, NoiseModel noise, SolverOptions options = {});

  FixedPoint solve(Side side, std::span<const double> p,
                   std::optional<double> start = std::nullopt) const;
  FixedPoint ask(std::span<const double> p, std::optional<double> start = std::nullopt) const {
    return solve(Side::Ask, p, start);
  }
  FixedPoint bid(std::span<const double> p, std::optional<double> start = std::nullopt) const {
    return solve(Side::Bid, p, start);
  }
  /// Both fixed points, optionally warm-started from a previous quote.
  Quote quote(std::span<const double> p, std::optional<Quote> warm = std::nullopt) const;

  const StateGrid& grid() const noexcept { return grid_; }
  const NoiseModel& noise() const noexcept { return noise_; }
  const SolverOptions& options() const noexcept { return options_; }
  /// Empty for forced static-only noise.
  const std::optional<ConditionReport>& condition() const noexcept { return condition_; }
  int max_iterations() const noexcept { return max_iterations_; }

 private:
  StateGrid grid_;
  NoiseModel noise_;
  SolverOptions options_;
  std::optional<ConditionReport> condition_;
  int max_iterations_ = 0;
};

double solve_ask(const Belief& pi, const StateGrid& grid, const NoiseModel& noise,
                 double tol = 1e-12, bool force = false);
double solve_bid(const Belief& pi, const StateGrid& grid, const NoiseModel& noise,
                 double tol = 1e-12, bool force = false);

/// All roots of s - g(s, p) (or s - h) on [x_1, x_n], located by a sign-change scan
/// over `points` equispaced values and refined by bisection. Brackets that straddle a
/// jump of g rather than a root are rejected by a residual check. Works for
/// static-only noise, where several fixed points may exist.
std::vector<double> scan_fixed_points(Side side, const Belief& pi, const StateGrid& grid,
                                      const NoiseModel& noise, int points = 20001);

struct ContractionConstants {
  double K = 0.0;
  double L = 0.0;   ///< Lipschitz constant of g in the belief (L1 norm)
  double M = 0.0;   ///< max noise density on [-C, C]
  double K1 = 0.0;  ///< 12 L n lambda M
  double t_star = 0.0;  ///< (1 - K) / (2 K1); +inf when K1 == 0
};

/// Throws Error(ConditionFailed) unless the condition passes.
ContractionConstants contraction_constants(const StateGrid& grid, const NoiseModel& noise,
                                           double lambda);

}  // namespace gm
