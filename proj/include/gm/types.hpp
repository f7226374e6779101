#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gm {

/// Ordered asset values x_1 < ... < x_n, n >= 2.
class StateGrid {
 public:
  /// Throws Error(ConfigError) unless strictly increasing, finite, n >= 2.
  explicit StateGrid(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }
  /// C = x_n - x_1.
  double width() const noexcept { return values_.back() - values_.front(); }
  /// max(|x_1|, |x_n|); bounds |x_i| for every state.
  double max_abs() const noexcept;

  friend bool operator==(const StateGrid&, const StateGrid&) = default;

 private:
  std::vector<double> values_;
};

/// Probability vector over the states. Renormalized on construction unless already
/// normalized to rounding.
class Belief {
 public:
  /// Requires non-negative finite entries summing to 1 within 1e-9.
  explicit Belief(std::vector<double> probs);
  /// Any non-negative weights with positive total; normalized.
  static Belief from_weights(std::vector<double> weights);
  static Belief point_mass(std::size_t n, std::size_t i);
  static Belief uniform(std::size_t n);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  double mean(const StateGrid& grid) const noexcept;

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  struct Unchecked {};
  Belief(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

struct Quote {
  double ask = 0.0;
  double bid = 0.0;
};

/// Markov-chain rate matrix, row-major, rows summing to zero.
class GeneratorMatrix {
 public:
  /// Off-diagonal rates; the diagonal of `rates` is ignored and derived.
  static GeneratorMatrix from_off_diagonal(std::size_t n, std::vector<double> rates);
  /// Full matrix; off-diagonals >= 0 and every row sum within tol of 0.
  static GeneratorMatrix from_full(std::size_t n, std::vector<double> q, double tol = 1e-12);
  static GeneratorMatrix zero(std::size_t n);
  static GeneratorMatrix two_state(double alpha, double beta);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return q_[i * n_ + j]; }
  std::span<const double> row_major() const noexcept { return q_; }
  /// Total exit rate of state i, -q(i,i).
  double exit_rate(std::size_t i) const noexcept { return -q_[i * n_ + i]; }

  friend bool operator==(const GeneratorMatrix&, const GeneratorMatrix&) = default;

 private:
  GeneratorMatrix(std::size_t n, std::vector<double> q) : n_(n), q_(std::move(q)) {}
  std::size_t n_ = 0;
  std::vector<double> q_;
};

}  // namespace gm
