// Built with -mavx2 only; never called unless the dispatcher has confirmed
// CPU support. FMA is deliberately not enabled so that the elementwise
// kernels round exactly like the scalar reference.

#include "gittins/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace gittins::simd::avx2 {

double weighted_sum(std::span<const double> w, std::span<const double> f) {
  const std::size_t n = w.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(
        acc0, _mm256_mul_pd(_mm256_loadu_pd(&w[i]), _mm256_loadu_pd(&f[i])));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(&w[i + 4]),
                                             _mm256_loadu_pd(&f[i + 4])));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(
        acc0, _mm256_mul_pd(_mm256_loadu_pd(&w[i]), _mm256_loadu_pd(&f[i])));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += w[i] * f[i];
  return acc;
}

void bellman_sweep(const BellmanArgs& a) {
  const std::size_t n = a.v.size();
  if (n < 3) return;
  const __m256d disc = _mm256_set1_pd(a.discount);
  const __m256d retire = _mm256_set1_pd(a.retire);
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d up = _mm256_mul_pd(_mm256_loadu_pd(&a.p_up[i]),
                                     _mm256_loadu_pd(&a.v[i + 1]));
    const __m256d down = _mm256_mul_pd(_mm256_loadu_pd(&a.p_down[i]),
                                       _mm256_loadu_pd(&a.v[i - 1]));
    const __m256d cont = _mm256_add_pd(
        _mm256_loadu_pd(&a.reward[i]),
        _mm256_mul_pd(disc, _mm256_add_pd(up, down)));
    // max_pd(cont, retire) == (cont > retire ? cont : retire), which is what
    // std::max(retire, cont) computes, NaN handling included.
    _mm256_storeu_pd(&a.out[i], _mm256_max_pd(cont, retire));
  }
  for (; i + 1 < n; ++i) {
    const double up = a.p_up[i] * a.v[i + 1];
    const double down = a.p_down[i] * a.v[i - 1];
    const double cont = a.reward[i] + a.discount * (up + down);
    a.out[i] = std::max(a.retire, cont);
  }
}

void euler_update(std::span<double> x, std::span<const double> drift,
                  std::span<const double> noise, double dt, double noise_scale) {
  const std::size_t n = x.size();
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vscale = _mm256_set1_pd(noise_scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d step = _mm256_mul_pd(_mm256_loadu_pd(&drift[i]), vdt);
    const __m256d kick = _mm256_mul_pd(vscale, _mm256_loadu_pd(&noise[i]));
    _mm256_storeu_pd(&x[i],
                     _mm256_add_pd(_mm256_loadu_pd(&x[i]),
                                   _mm256_add_pd(step, kick)));
  }
  for (; i < n; ++i) {
    const double step = drift[i] * dt;
    const double kick = noise_scale * noise[i];
    x[i] = x[i] + (step + kick);
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = y.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&y[i], _mm256_add_pd(_mm256_loadu_pd(&y[i]),
                                          _mm256_mul_pd(va, _mm256_loadu_pd(&x[i]))));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

}  // namespace gittins::simd::avx2
