#pragma once

#include <optional>
#include <string>
#include <variant>

#include "gm/rng.hpp"

namespace gm {

// Valuation noise families. Phi(y) = P[eps >= y] is the survival function,
// Psi(y) = P[eps <= y] the cdf. Discrete families are usable for static
// pricing only; they have atoms and no density.
namespace noise {

struct Logistic {
  double scale;
};
struct Gaussian {
  double sigma;
};
struct Laplace {
  double scale;
};
/// eps = +value with probability prob, -value otherwise.
struct TwoPointDiscrete {
  double value;
  double prob;
};
/// eps = +inf with probability buy_prob, -inf otherwise (pure noise traders).
struct NoiseTraderMix {
  double buy_prob;
};

}  // namespace noise

class NoiseModel {
 public:
  using Family = std::variant<noise::Logistic, noise::Gaussian, noise::Laplace,
                              noise::TwoPointDiscrete, noise::NoiseTraderMix>;

  /// Throws Error(ConfigError) on invalid parameters.
  explicit NoiseModel(Family family);

  static NoiseModel logistic(double scale) { return NoiseModel(noise::Logistic{scale}); }
  static NoiseModel gaussian(double sigma) { return NoiseModel(noise::Gaussian{sigma}); }
  static NoiseModel laplace(double scale) { return NoiseModel(noise::Laplace{scale}); }
  static NoiseModel two_point(double value, double prob) {
    return NoiseModel(noise::TwoPointDiscrete{value, prob});
  }
  static NoiseModel noise_trader(double buy_prob) {
    return NoiseModel(noise::NoiseTraderMix{buy_prob});
  }

  const Family& family() const noexcept { return family_; }
  std::string name() const;

  double survival(double y) const noexcept;
  double cdf(double y) const noexcept;
  /// -Phi'(y). Throws Error(NotDifferentiable) for static-only families.
  double density(double y) const;

  bool static_only() const noexcept;

  /// Closed-form sup over all y of -Phi'(y) / min{Phi(y), 1 - Phi(y)}, when known.
  std::optional<double> analytic_hazard_bound() const noexcept;
  /// Closed-form max of the density over [-c, c], when known.
  std::optional<double> analytic_max_density(double c) const noexcept;

  /// One draw of eps. May return +/-inf for NoiseTraderMix.
  double sample(Rng& rng) const noexcept;

  friend bool operator==(const NoiseModel& a, const NoiseModel& b);

 private:
  Family family_;
};

/// Upper-tail standard normal probability Q(z) = P[Z >= z].
double normal_upper_tail(double z) noexcept;

struct ConditionReport {
  double K = 0.0;           ///< contraction constant used for the verdict
  double K_grid = 0.0;      ///< grid-scan estimate of the same supremum on [-C, C]
  double phi_at_C = 0.0;
  double phi_at_zero = 0.0;
  double M = 0.0;           ///< max density on [-C, C]
  double phi_C_lower_bound = 0.0;  ///< (1 - K) Phi(0); Phi(C) must dominate it when K < 1
  bool differentiable = false;
  bool passes = false;
  int grid_points = 0;
};

inline constexpr int kConditionGridPoints = 10001;

/// Numeric certificate for -Phi'(y) <= (K/C) min{Phi(y), 1-Phi(y)} on [-C, C].
/// Throws Error(NotDifferentiable) for static-only families, Error(DomainError) if c <= 0.
ConditionReport check_gm_condition(const NoiseModel& noise, double c,
                                   int grid_points = kConditionGridPoints);

}  // namespace gm
