#pragma once
#include <cstddef>

// Data-parallel reduction/update kernels used by the quadrature and field
// arithmetic inner loops. Scalar reference implementations always exist;
// AVX2 variants are selected at runtime when the CPU supports them.
// Both paths are equivalence-tested against each other.

namespace fene::kernels {

enum class Backend { Scalar, Avx2 };

struct Dispatch {
  double (*dot)(const double*, const double*, std::size_t);
  // sum_i w[i] * a[i] * b[i]
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  // y += alpha * x
  void (*axpy)(double, const double*, double*, std::size_t);
  // three weighted reductions sharing one pass over h:
  // out[c] = sum_i wc[i] * h[i]
  void (*reduce3)(const double*, const double*, const double*, const double*,
                  std::size_t, double*);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void reduce3(const double* w0, const double* w1, const double* w2,
             const double* h, std::size_t n, double* out);
}  // namespace scalar

#ifdef FENE_BUILD_AVX2
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void reduce3(const double* w0, const double* w1, const double* w2,
             const double* h, std::size_t n, double* out);
}  // namespace avx2
#endif

Backend active_backend();
// Override the runtime choice (tests use this to compare paths).
void force_backend(Backend b);
void reset_backend();

double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void reduce3(const double* w0, const double* w1, const double* w2,
             const double* h, std::size_t n, double* out);

}  // namespace fene::kernels
