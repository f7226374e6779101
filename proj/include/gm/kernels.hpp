#pragma once

// Per-state vector kernels used on the filter hot path. Each operation has a
// scalar reference implementation and, on x86-64, an AVX2 variant chosen at
// runtime. Both must agree to rounding (see tests/test_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>

namespace gm::kernels {

struct WeightedSums {
  double mass = 0.0;          ///< sum_i p_i w_i
  double first_moment = 0.0;  ///< sum_i x_i p_i w_i
};

struct RenormResult {
  double min_component = 0.0;  ///< smallest entry before clamping
  double sum = 0.0;            ///< sum after clamping, before dividing
};

struct KernelTable {
  std::string_view name;
  WeightedSums (*weighted_sums)(std::span<const double> p, std::span<const double> w,
                                std::span<const double> x);
  /// out_i = p_i w_i / sum_j p_j w_j; returns the normalizer. out may alias p.
  double (*reweight)(std::span<const double> p, std::span<const double> w, std::span<double> out);
  /// out_i = lambda p_i (sum_j p_j a_j - a_i) + sum_j p_j q(j,i), q row-major n x n.
  void (*drift)(std::span<const double> p, std::span<const double> a, std::span<const double> q,
                double lambda, std::span<double> out);
  /// out = y + alpha k.
  void (*axpy)(std::span<const double> y, double alpha, std::span<const double> k,
               std::span<double> out);
  /// out = y + h/6 (k1 + 2 k2 + 2 k3 + k4).
  void (*rk4_combine)(std::span<const double> y, std::span<const double> k1,
                      std::span<const double> k2, std::span<const double> k3,
                      std::span<const double> k4, double h, std::span<double> out);
  /// Clamp negatives to 0 then divide by the sum.
  RenormResult (*clamp_renormalize)(std::span<double> p);
  double (*l1_distance)(std::span<const double> a, std::span<const double> b);
};

enum class Backend { Auto, Scalar, Avx2 };

const KernelTable& scalar_table() noexcept;
/// nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// Currently selected table; Auto picks AVX2 when available.
const KernelTable& active() noexcept;
/// Returns false (and leaves the selection unchanged) if the backend is unavailable.
bool select(Backend backend) noexcept;

}  // namespace gm::kernels
