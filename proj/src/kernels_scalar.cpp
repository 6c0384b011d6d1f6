#include "fene/kernels.hpp"

namespace fene::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void reduce3(const double* w0, const double* w1, const double* w2,
             const double* h, std::size_t n, double* out) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = h[i];
    s0 += w0[i] * hi;
    s1 += w1[i] * hi;
    s2 += w2[i] * hi;
  }
  out[0] = s0;
  out[1] = s1;
  out[2] = s2;
}

}  // namespace fene::kernels::scalar
