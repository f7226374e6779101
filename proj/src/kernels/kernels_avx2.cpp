// AVX2 variants of the per-state kernels. This translation unit is compiled
// with -mavx2 -mfma and must only be entered after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>

#include "gm/kernels.hpp"

namespace gm::kernels {

namespace {

inline __m256i tail_mask(std::size_t remaining) {
  const __m256i lanes = _mm256_setr_epi64x(0, 1, 2, 3);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lanes);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d load(const double* p, std::size_t i, std::size_t n) {
  if (i + 4 <= n) return _mm256_loadu_pd(p + i);
  return _mm256_maskload_pd(p + i, tail_mask(n - i));
}

inline void store(double* p, std::size_t i, std::size_t n, __m256d v) {
  if (i + 4 <= n) {
    _mm256_storeu_pd(p + i, v);
  } else {
    _mm256_maskstore_pd(p + i, tail_mask(n - i), v);
  }
}

WeightedSums weighted_sums(std::span<const double> p, std::span<const double> w,
                           std::span<const double> x) {
  const std::size_t n = p.size();
  __m256d mass = _mm256_setzero_pd();
  __m256d moment = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256d pw = _mm256_mul_pd(load(p.data(), i, n), load(w.data(), i, n));
    mass = _mm256_add_pd(mass, pw);
    moment = _mm256_fmadd_pd(load(x.data(), i, n), pw, moment);
  }
  return {hsum(mass), hsum(moment)};
}

double reweight(std::span<const double> p, std::span<const double> w, std::span<double> out) {
  const std::size_t n = p.size();
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; i += 4)
    acc = _mm256_fmadd_pd(load(p.data(), i, n), load(w.data(), i, n), acc);
  const double z = hsum(acc);
  const __m256d inv = _mm256_set1_pd(1.0 / z);
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256d pw = _mm256_mul_pd(load(p.data(), i, n), load(w.data(), i, n));
    store(out.data(), i, n, _mm256_mul_pd(pw, inv));
  }
  return z;
}

void drift(std::span<const double> p, std::span<const double> a, std::span<const double> q,
           double lambda, std::span<double> out) {
  const std::size_t n = p.size();
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; i += 4)
    acc = _mm256_fmadd_pd(load(p.data(), i, n), load(a.data(), i, n), acc);
  const __m256d pa = _mm256_set1_pd(hsum(acc));
  const __m256d lam = _mm256_set1_pd(lambda);
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256d pi = load(p.data(), i, n);
    __m256d v = _mm256_mul_pd(_mm256_mul_pd(lam, pi), _mm256_sub_pd(pa, load(a.data(), i, n)));
    // Generator column i contracted with p: sum_j p_j q(j, i).
    for (std::size_t j = 0; j < n; ++j)
      v = _mm256_fmadd_pd(_mm256_set1_pd(p[j]), load(q.data() + j * n, i, n), v);
    store(out.data(), i, n, v);
  }
}

void axpy(std::span<const double> y, double alpha, std::span<const double> k,
          std::span<double> out) {
  const std::size_t n = y.size();
  const __m256d a = _mm256_set1_pd(alpha);
  for (std::size_t i = 0; i < n; i += 4)
    store(out.data(), i, n, _mm256_fmadd_pd(a, load(k.data(), i, n), load(y.data(), i, n)));
}

void rk4_combine(std::span<const double> y, std::span<const double> k1, std::span<const double> k2,
                 std::span<const double> k3, std::span<const double> k4, double h,
                 std::span<double> out) {
  const std::size_t n = y.size();
  const __m256d h6 = _mm256_set1_pd(h / 6.0);
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = 0; i < n; i += 4) {
    __m256d s = _mm256_add_pd(load(k1.data(), i, n), load(k4.data(), i, n));
    s = _mm256_fmadd_pd(two, _mm256_add_pd(load(k2.data(), i, n), load(k3.data(), i, n)), s);
    store(out.data(), i, n, _mm256_fmadd_pd(h6, s, load(y.data(), i, n)));
  }
}

RenormResult clamp_renormalize(std::span<double> p) {
  const std::size_t n = p.size();
  RenormResult r;
  if (n == 0) return r;
  const __m256d zero = _mm256_setzero_pd();
  __m256d mn = _mm256_set1_pd(p[0]);
  __m256d sum = zero;
  for (std::size_t i = 0; i < n; i += 4) {
    __m256d v = load(p.data(), i, n);
    if (i + 4 > n) {
      // Pad inactive lanes with p[0] so they do not disturb the minimum.
      v = _mm256_blendv_pd(mn, v, _mm256_castsi256_pd(tail_mask(n - i)));
    }
    mn = _mm256_min_pd(mn, v);
    v = _mm256_max_pd(v, zero);
    if (i + 4 > n) v = _mm256_and_pd(v, _mm256_castsi256_pd(tail_mask(n - i)));
    sum = _mm256_add_pd(sum, v);
    store(p.data(), i, n, v);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, mn);
  r.min_component = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  r.sum = hsum(sum);
  const __m256d inv = _mm256_set1_pd(1.0 / r.sum);
  for (std::size_t i = 0; i < n; i += 4)
    store(p.data(), i, n, _mm256_mul_pd(load(p.data(), i, n), inv));
  return r;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256d d = _mm256_sub_pd(load(a.data(), i, n), load(b.data(), i, n));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  return hsum(acc);
}

constexpr KernelTable kAvx2{
    "avx2", weighted_sums, reweight, drift, axpy, rk4_combine, clamp_renormalize, l1_distance,
};

}  // namespace

const KernelTable& avx2_table_unchecked() noexcept { return kAvx2; }

}  // namespace gm::kernels
