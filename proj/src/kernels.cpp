#include "fene/kernels.hpp"

namespace fene::kernels {

namespace {

constexpr Dispatch kScalar{scalar::dot, scalar::dot3, scalar::axpy, scalar::reduce3};
#ifdef FENE_BUILD_AVX2
constexpr Dispatch kAvx2{avx2::dot, avx2::dot3, avx2::axpy, avx2::reduce3};
#endif

Backend detect() {
#ifdef FENE_BUILD_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Backend::Avx2;
#endif
  return Backend::Scalar;
}

Backend g_backend = detect();

const Dispatch& table() {
#ifdef FENE_BUILD_AVX2
  if (g_backend == Backend::Avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
#ifndef FENE_BUILD_AVX2
  (void)b;
  g_backend = Backend::Scalar;
  return;
#else
  g_backend = (b == Backend::Avx2 && detect() == Backend::Avx2) ? Backend::Avx2
                                                                : Backend::Scalar;
#endif
}

void reset_backend() { g_backend = detect(); }

double dot(const double* a, const double* b, std::size_t n) {
  return table().dot(a, b, n);
}
double dot3(const double* w, const double* a, const double* b, std::size_t n) {
  return table().dot3(w, a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  table().axpy(alpha, x, y, n);
}
void reduce3(const double* w0, const double* w1, const double* w2,
             const double* h, std::size_t n, double* out) {
  table().reduce3(w0, w1, w2, h, n, out);
}

}  // namespace fene::kernels
