#include "gm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gm/errors.hpp"

namespace gm {

StateGrid::StateGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw Error(ErrorCode::ConfigError, "state grid needs at least 2 values");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw Error(ErrorCode::ConfigError, "state value " + std::to_string(i) + " is not finite");
    if (i > 0 && !(values_[i] > values_[i - 1]))
      throw Error(ErrorCode::ConfigError, "state values must be strictly increasing");
  }
}

double StateGrid::max_abs() const noexcept {
  return std::max(std::abs(values_.front()), std::abs(values_.back()));
}

Belief::Belief(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::DomainError, "empty belief");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0)
      throw Error(ErrorCode::DomainError, "belief entries must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::DomainError, "belief must sum to 1 (got " + std::to_string(sum) + ")");
  // Already normalized to rounding: keep the values as given, so that
  // serialize -> parse reproduces the belief bit for bit.
  if (std::abs(sum - 1.0) > 1e-14)
    for (double& p : probs_) p /= sum;
}

Belief Belief::from_weights(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw Error(ErrorCode::DomainError, "belief weights must be finite and non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::DomainError, "belief weights have zero total");
  for (double& w : weights) w /= sum;
  return Belief(std::move(weights), Unchecked{});
}

Belief Belief::point_mass(std::size_t n, std::size_t i) {
  std::vector<double> p(n, 0.0);
  p.at(i) = 1.0;
  return Belief(std::move(p), Unchecked{});
}

Belief Belief::uniform(std::size_t n) {
  return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n)), Unchecked{});
}

double Belief::mean(const StateGrid& grid) const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) m += probs_[i] * grid[i];
  return m;
}

GeneratorMatrix GeneratorMatrix::from_off_diagonal(std::size_t n, std::vector<double> rates) {
  if (rates.size() != n * n) throw Error(ErrorCode::ConfigError, "generator must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = rates[i * n + j];
      if (!std::isfinite(r) || r < 0.0)
        throw Error(ErrorCode::ConfigError, "generator[" + std::to_string(i) + "][" +
                                                std::to_string(j) + "] must be finite and >= 0");
      out += r;
    }
    rates[i * n + i] = -out;
  }
  return GeneratorMatrix(n, std::move(rates));
}

GeneratorMatrix GeneratorMatrix::from_full(std::size_t n, std::vector<double> q, double tol) {
  const std::vector<double> supplied = q;
  GeneratorMatrix g = from_off_diagonal(n, std::move(q));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(supplied[i * n + i] - g(i, i)) > tol)
      throw Error(ErrorCode::ConfigError,
                  "generator row " + std::to_string(i) + " does not sum to 0");
  }
  return g;
}

GeneratorMatrix GeneratorMatrix::zero(std::size_t n) {
  return GeneratorMatrix(n, std::vector<double>(n * n, 0.0));
}

GeneratorMatrix GeneratorMatrix::two_state(double alpha, double beta) {
  return from_off_diagonal(2, {0.0, alpha, beta, 0.0});
}

}  // namespace gm
