#include "gittins/simd/kernels.hpp"

#include <algorithm>

namespace gittins::simd::generic {

double weighted_sum(std::span<const double> w, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i];
  return acc;
}

void bellman_sweep(const BellmanArgs& a) {
  const std::size_t n = a.v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double up = a.p_up[i] * a.v[i + 1];
    const double down = a.p_down[i] * a.v[i - 1];
    const double cont = a.reward[i] + a.discount * (up + down);
    a.out[i] = std::max(a.retire, cont);
  }
}

void euler_update(std::span<double> x, std::span<const double> drift,
                  std::span<const double> noise, double dt, double noise_scale) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = drift[i] * dt;
    const double kick = noise_scale * noise[i];
    x[i] = x[i] + (step + kick);
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] + a * x[i];
}

}  // namespace gittins::simd::generic
