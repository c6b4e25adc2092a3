#pragma once

// Data-parallel inner loops shared by the quadrature, lattice and SDE code.
//
// Every kernel has a portable scalar reference in namespace `generic` and,
// on x86-64, an AVX2 variant in namespace `avx2`. The entry points in
// namespace `simd` dispatch once at startup on CPU support; setting the
// environment variable GITTINS_SIMD=scalar forces the reference path.
//
// The elementwise kernels perform the same floating-point operations in the
// same order in both variants (no FMA contraction), so their results are
// bit-identical. weighted_sum reorders the accumulation across lanes and
// agrees with the reference to a few ulps.

#include <cstddef>
#include <span>
#include <string_view>

namespace gittins::simd {

/// Arguments of one Bellman continuation sweep over interior lattice states.
///
/// For i in [1, n-1): out[i] = max(retire, reward[i] + discount *
/// (p_up[i] * v[i+1] + p_down[i] * v[i-1])). Entries 0 and n-1 of `out` are
/// left untouched; the caller applies its boundary rule there.
struct BellmanArgs {
  std::span<const double> v;
  std::span<const double> reward;
  std::span<const double> p_up;
  std::span<const double> p_down;
  double discount;
  double retire;
  std::span<double> out;
};

namespace generic {
double weighted_sum(std::span<const double> w, std::span<const double> f);
void bellman_sweep(const BellmanArgs& a);
void euler_update(std::span<double> x, std::span<const double> drift,
                  std::span<const double> noise, double dt, double noise_scale);
void axpy(double a, std::span<const double> x, std::span<double> y);
}  // namespace generic

#if defined(__x86_64__) || defined(_M_X64)
#define GITTINS_HAVE_AVX2_KERNELS 1
namespace avx2 {
double weighted_sum(std::span<const double> w, std::span<const double> f);
void bellman_sweep(const BellmanArgs& a);
void euler_update(std::span<double> x, std::span<const double> drift,
                  std::span<const double> noise, double dt, double noise_scale);
void axpy(double a, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

/// Name of the variant selected by the dispatcher ("avx2" or "scalar").
std::string_view active_variant();

/// True when the running CPU can execute the AVX2 kernels.
bool avx2_supported();

double weighted_sum(std::span<const double> w, std::span<const double> f);
void bellman_sweep(const BellmanArgs& a);

/// x[i] += drift[i] * dt + noise_scale * noise[i]
void euler_update(std::span<double> x, std::span<const double> drift,
                  std::span<const double> noise, double dt, double noise_scale);

/// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace gittins::simd
