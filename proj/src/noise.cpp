#include "gm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gm/errors.hpp"

namespace gm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// erf(t) = 2/sqrt(pi) exp(-t^2) sum_n (2t^2)^n t / (1*3*...*(2n+1)); all terms positive.
double erf_series(double t) noexcept {
  const double two_t2 = 2.0 * t * t;
  double term = t;
  double sum = t;
  for (int n = 1; n < 500; ++n) {
    term *= two_t2 / (2.0 * n + 1.0);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-t * t) * sum;
}

// erfc(t) for t > 0 by the Laplace continued fraction, modified Lentz evaluation.
double erfc_continued_fraction(double t) noexcept {
  constexpr double tiny = 1e-300;
  double f = t;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 5000; ++k) {
    const double a = 0.5 * k;
    d = t + a * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = t + a / c;
    if (std::abs(c) < tiny) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-t * t) / (std::sqrt(std::numbers::pi) * f);
}

double erfc_positive(double t) noexcept {
  if (t < 1.5) return 1.0 - erf_series(t);
  return erfc_continued_fraction(t);
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

}  // namespace

double normal_upper_tail(double z) noexcept {
  if (std::isnan(z)) return z;
  if (z == kInf) return 0.0;
  if (z == -kInf) return 1.0;
  const double t = std::abs(z) / std::numbers::sqrt2;
  const double upper = 0.5 * erfc_positive(t);
  return z >= 0.0 ? upper : 1.0 - upper;
}

NoiseModel::NoiseModel(Family family) : family_(family) {
  std::visit(overloaded{
                 [](const noise::Logistic& f) {
                   require(std::isfinite(f.scale) && f.scale > 0.0, "logistic scale must be > 0");
                 },
                 [](const noise::Gaussian& f) {
                   require(std::isfinite(f.sigma) && f.sigma > 0.0, "gaussian sigma must be > 0");
                 },
                 [](const noise::Laplace& f) {
                   require(std::isfinite(f.scale) && f.scale > 0.0, "laplace scale must be > 0");
                 },
                 [](const noise::TwoPointDiscrete& f) {
                   require(std::isfinite(f.value) && f.value >= 0.0, "two-point value must be >= 0");
                   require(f.prob >= 0.0 && f.prob <= 1.0, "two-point prob must lie in [0,1]");
                 },
                 [](const noise::NoiseTraderMix& f) {
                   require(f.buy_prob >= 0.0 && f.buy_prob <= 1.0,
                           "noise-trader buy_prob must lie in [0,1]");
                 },
             },
             family_);
}

std::string NoiseModel::name() const {
  return std::visit(overloaded{
                        [](const noise::Logistic&) { return std::string("logistic"); },
                        [](const noise::Gaussian&) { return std::string("gaussian"); },
                        [](const noise::Laplace&) { return std::string("laplace"); },
                        [](const noise::TwoPointDiscrete&) { return std::string("two_point"); },
                        [](const noise::NoiseTraderMix&) { return std::string("noise_trader"); },
                    },
                    family_);
}

double NoiseModel::survival(double y) const noexcept {
  return std::visit(
      overloaded{
          [y](const noise::Logistic& f) { return 1.0 / (1.0 + std::exp(y / f.scale)); },
          [y](const noise::Gaussian& f) { return normal_upper_tail(y / f.sigma); },
          [y](const noise::Laplace& f) {
            return y < 0.0 ? 1.0 - 0.5 * std::exp(y / f.scale) : 0.5 * std::exp(-y / f.scale);
          },
          [y](const noise::TwoPointDiscrete& f) {
            double p = 0.0;
            if (f.value >= y) p += f.prob;
            if (-f.value >= y) p += 1.0 - f.prob;
            return p;
          },
          [](const noise::NoiseTraderMix& f) { return f.buy_prob; },
      },
      family_);
}

double NoiseModel::cdf(double y) const noexcept {
  return std::visit(
      overloaded{
          [y](const noise::Logistic& f) { return 1.0 / (1.0 + std::exp(-y / f.scale)); },
          [y](const noise::Gaussian& f) { return normal_upper_tail(-y / f.sigma); },
          [y](const noise::Laplace& f) {
            return y < 0.0 ? 0.5 * std::exp(y / f.scale) : 1.0 - 0.5 * std::exp(-y / f.scale);
          },
          [y](const noise::TwoPointDiscrete& f) {
            double p = 0.0;
            if (f.value <= y) p += f.prob;
            if (-f.value <= y) p += 1.0 - f.prob;
            return p;
          },
          [](const noise::NoiseTraderMix& f) { return 1.0 - f.buy_prob; },
      },
      family_);
}

double NoiseModel::density(double y) const {
  return std::visit(
      overloaded{
          [y](const noise::Logistic& f) {
            const double phi = 1.0 / (1.0 + std::exp(y / f.scale));
            return phi * (1.0 - phi) / f.scale;
          },
          [y](const noise::Gaussian& f) {
            const double z = y / f.sigma;
            return std::exp(-0.5 * z * z) / (f.sigma * std::sqrt(2.0 * std::numbers::pi));
          },
          [y](const noise::Laplace& f) { return 0.5 * std::exp(-std::abs(y) / f.scale) / f.scale; },
          [](const noise::TwoPointDiscrete&) -> double {
            throw Error(ErrorCode::NotDifferentiable, "two-point noise has no density");
          },
          [](const noise::NoiseTraderMix&) -> double {
            throw Error(ErrorCode::NotDifferentiable, "noise-trader mix has no density");
          },
      },
      family_);
}

bool NoiseModel::static_only() const noexcept {
  return std::holds_alternative<noise::TwoPointDiscrete>(family_) ||
         std::holds_alternative<noise::NoiseTraderMix>(family_);
}

std::optional<double> NoiseModel::analytic_hazard_bound() const noexcept {
  // Logistic: -Phi' = Phi(1-Phi)/s, so the ratio is max{Phi,1-Phi}/s -> 1/s in the tails.
  // Laplace: the ratio is exactly 1/b everywhere.
  if (const auto* f = std::get_if<noise::Logistic>(&family_)) return 1.0 / f->scale;
  if (const auto* f = std::get_if<noise::Laplace>(&family_)) return 1.0 / f->scale;
  return std::nullopt;
}

std::optional<double> NoiseModel::analytic_max_density(double) const noexcept {
  // All continuous families here are symmetric unimodal at 0, and 0 is in [-c, c].
  if (const auto* f = std::get_if<noise::Logistic>(&family_)) return 0.25 / f->scale;
  if (const auto* f = std::get_if<noise::Laplace>(&family_)) return 0.5 / f->scale;
  if (const auto* f = std::get_if<noise::Gaussian>(&family_))
    return 1.0 / (f->sigma * std::sqrt(2.0 * std::numbers::pi));
  return std::nullopt;
}

double NoiseModel::sample(Rng& rng) const noexcept {
  return std::visit(
      overloaded{
          [&rng](const noise::Logistic& f) {
            const double u = rng.uniform();
            return f.scale * std::log(u / (1.0 - u));
          },
          [&rng](const noise::Gaussian& f) { return f.sigma * rng.normal(); },
          [&rng](const noise::Laplace& f) {
            const double u = rng.uniform() - 0.5;
            return u < 0.0 ? f.scale * std::log1p(2.0 * u) : -f.scale * std::log1p(-2.0 * u);
          },
          [&rng](const noise::TwoPointDiscrete& f) {
            return rng.bernoulli(f.prob) ? f.value : -f.value;
          },
          [&rng](const noise::NoiseTraderMix& f) { return rng.bernoulli(f.buy_prob) ? kInf : -kInf; },
      },
      family_);
}

bool operator==(const NoiseModel& a, const NoiseModel& b) {
  if (a.family_.index() != b.family_.index()) return false;
  return std::visit(
      overloaded{
          [&](const noise::Logistic& f) { return f.scale == std::get<noise::Logistic>(b.family_).scale; },
          [&](const noise::Gaussian& f) { return f.sigma == std::get<noise::Gaussian>(b.family_).sigma; },
          [&](const noise::Laplace& f) { return f.scale == std::get<noise::Laplace>(b.family_).scale; },
          [&](const noise::TwoPointDiscrete& f) {
            const auto& g = std::get<noise::TwoPointDiscrete>(b.family_);
            return f.value == g.value && f.prob == g.prob;
          },
          [&](const noise::NoiseTraderMix& f) {
            return f.buy_prob == std::get<noise::NoiseTraderMix>(b.family_).buy_prob;
          },
      },
      a.family_);
}

ConditionReport check_gm_condition(const NoiseModel& noise, double c, int grid_points) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::DomainError, "C must be > 0");
  if (noise.static_only())
    throw Error(ErrorCode::NotDifferentiable,
                noise.name() + " noise violates the differentiability hypothesis");
  if (grid_points < 3) grid_points = 3;

  ConditionReport r;
  r.grid_points = grid_points;
  r.differentiable = true;
  r.phi_at_C = noise.survival(c);
  r.phi_at_zero = noise.survival(0.0);

  double ratio_sup = 0.0;
  double density_max = 0.0;
  const int last = grid_points - 1;
  for (int k = 0; k <= last; ++k) {
    // Symmetric construction puts y = 0 exactly on the grid when grid_points is odd.
    const double y = c * static_cast<double>(2 * k - last) / static_cast<double>(last);
    const double phi = noise.survival(y);
    const double dens = noise.density(y);
    density_max = std::max(density_max, dens);
    const double denom = std::min(phi, 1.0 - phi);
    if (denom <= 0.0) {
      ratio_sup = dens > 0.0 ? std::numeric_limits<double>::infinity() : ratio_sup;
      continue;
    }
    ratio_sup = std::max(ratio_sup, dens / denom);
  }
  r.K_grid = c * ratio_sup;
  const auto analytic = noise.analytic_hazard_bound();
  r.K = analytic ? c * *analytic : r.K_grid;
  r.M = noise.analytic_max_density(c).value_or(density_max);
  r.phi_C_lower_bound = (1.0 - r.K) * r.phi_at_zero;
  r.passes = r.K < 1.0 && r.phi_at_zero > 0.0 && r.phi_at_zero < 1.0 && r.differentiable;
  return r;
}

}  // namespace gm
