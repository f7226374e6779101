#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gm {

/// SplitMix64 finalizer. Used to derive independent stream seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { TrueValue = 1, Arrivals = 2, Noise = 3, Auxiliary = 4 };

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream) noexcept {
  return splitmix64(splitmix64(master) ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
}

// The transforms below are written out instead of using <random> distributions,
// whose output differs between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, Stream stream) : engine_(derive_seed(master, stream)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gm
