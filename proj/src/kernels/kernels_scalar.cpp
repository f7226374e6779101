#include <algorithm>

#include "gm/kernels.hpp"

namespace gm::kernels {

namespace {

WeightedSums weighted_sums(std::span<const double> p, std::span<const double> w,
                           std::span<const double> x) {
  WeightedSums s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pw = p[i] * w[i];
    s.mass += pw;
    s.first_moment += x[i] * pw;
  }
  return s;
}

double reweight(std::span<const double> p, std::span<const double> w, std::span<double> out) {
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] * w[i];
  const double inv = 1.0 / z;
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * w[i] * inv;
  return z;
}

void drift(std::span<const double> p, std::span<const double> a, std::span<const double> q,
           double lambda, std::span<double> out) {
  const std::size_t n = p.size();
  double pa = 0.0;
  for (std::size_t j = 0; j < n; ++j) pa += p[j] * a[j];
  for (std::size_t i = 0; i < n; ++i) out[i] = lambda * p[i] * (pa - a[i]);
  for (std::size_t j = 0; j < n; ++j) {
    const double pj = p[j];
    const double* row = q.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += pj * row[i];
  }
}

void axpy(std::span<const double> y, double alpha, std::span<const double> k,
          std::span<double> out) {
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + alpha * k[i];
}

void rk4_combine(std::span<const double> y, std::span<const double> k1, std::span<const double> k2,
                 std::span<const double> k3, std::span<const double> k4, double h,
                 std::span<double> out) {
  const double h6 = h / 6.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

RenormResult clamp_renormalize(std::span<double> p) {
  RenormResult r;
  r.min_component = p.empty() ? 0.0 : p[0];
  for (double& v : p) {
    r.min_component = std::min(r.min_component, v);
    v = std::max(v, 0.0);
    r.sum += v;
  }
  const double inv = 1.0 / r.sum;
  for (double& v : p) v *= inv;
  return r;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return d;
}

constexpr KernelTable kScalar{
    "scalar", weighted_sums, reweight, drift, axpy, rk4_combine, clamp_renormalize, l1_distance,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace gm::kernels
