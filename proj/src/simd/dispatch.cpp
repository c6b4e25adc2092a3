#include <cstdlib>
#include <string_view>

#include "gittins/simd/kernels.hpp"

namespace gittins::simd {
namespace {

struct KernelTable {
  std::string_view name;
  double (*weighted_sum)(std::span<const double>, std::span<const double>);
  void (*bellman_sweep)(const BellmanArgs&);
  void (*euler_update)(std::span<double>, std::span<const double>,
                       std::span<const double>, double, double);
  void (*axpy)(double, std::span<const double>, std::span<double>);
};

bool forced_scalar() {
  const char* env = std::getenv("GITTINS_SIMD");
  return env != nullptr && std::string_view(env) == "scalar";
}

KernelTable select_table() {
#if defined(GITTINS_HAVE_AVX2_KERNELS)
  if (avx2_supported() && !forced_scalar()) {
    return {"avx2", avx2::weighted_sum, avx2::bellman_sweep,
            avx2::euler_update, avx2::axpy};
  }
#endif
  return {"scalar", generic::weighted_sum, generic::bellman_sweep,
          generic::euler_update, generic::axpy};
}

const KernelTable& table() {
  static const KernelTable t = select_table();
  return t;
}

}  // namespace

bool avx2_supported() {
#if defined(GITTINS_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::string_view active_variant() { return table().name; }

double weighted_sum(std::span<const double> w, std::span<const double> f) {
  return table().weighted_sum(w, f);
}

void bellman_sweep(const BellmanArgs& a) { table().bellman_sweep(a); }

void euler_update(std::span<double> x, std::span<const double> drift,
                  std::span<const double> noise, double dt, double noise_scale) {
  table().euler_update(x, drift, noise, dt, noise_scale);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  table().axpy(a, x, y);
}

}  // namespace gittins::simd
