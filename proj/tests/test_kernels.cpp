#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "fene/kernels.hpp"

using namespace fene::kernels;

namespace {

std::vector<double> random_vec(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

struct BackendGuard {
  ~BackendGuard() { reset_backend(); }
};

}  // namespace

TEST_CASE("scalar dot matches a plain loop") {
  std::mt19937 rng(7);
  for (std::size_t n : {1u, 3u, 4u, 17u, 256u, 1031u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += a[i] * b[i];
    CHECK(scalar::dot(a.data(), b.data(), n) == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("scalar dot3 and reduce3 agree with each other") {
  std::mt19937 rng(11);
  for (std::size_t n : {5u, 64u, 333u}) {
    auto w0 = random_vec(rng, n), w1 = random_vec(rng, n), w2 = random_vec(rng, n);
    auto h = random_vec(rng, n);
    auto ones = std::vector<double>(n, 1.0);
    double out[3];
    scalar::reduce3(w0.data(), w1.data(), w2.data(), h.data(), n, out);
    CHECK(out[0] ==
          doctest::Approx(scalar::dot3(w0.data(), h.data(), ones.data(), n)).epsilon(1e-13));
    CHECK(out[1] ==
          doctest::Approx(scalar::dot3(w1.data(), h.data(), ones.data(), n)).epsilon(1e-13));
    CHECK(out[2] ==
          doctest::Approx(scalar::dot3(w2.data(), h.data(), ones.data(), n)).epsilon(1e-13));
  }
}

TEST_CASE("axpy updates in place") {
  std::vector<double> x{1, 2, 3, 4, 5}, y{10, 10, 10, 10, 10};
  scalar::axpy(0.5, x.data(), y.data(), 5);
  CHECK(y[0] == 10.5);
  CHECK(y[4] == 12.5);
}

TEST_CASE("runtime dispatch equals the scalar reference on every kernel") {
  BackendGuard guard;
  reset_backend();
  const Backend active = active_backend();
  INFO("active backend: ", active == Backend::Avx2 ? "avx2" : "scalar");

  std::mt19937 rng(23);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 64u, 255u, 1024u, 2049u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n), w = random_vec(rng, n);
    auto w1 = random_vec(rng, n), w2 = random_vec(rng, n);

    force_backend(Backend::Scalar);
    const double d_s = dot(a.data(), b.data(), n);
    const double d3_s = dot3(w.data(), a.data(), b.data(), n);
    double r3_s[3];
    reduce3(w.data(), w1.data(), w2.data(), a.data(), n, r3_s);
    auto y_s = b;
    axpy(0.37, a.data(), y_s.data(), n);

    force_backend(active);
    const double d_v = dot(a.data(), b.data(), n);
    const double d3_v = dot3(w.data(), a.data(), b.data(), n);
    double r3_v[3];
    reduce3(w.data(), w1.data(), w2.data(), a.data(), n, r3_v);
    auto y_v = b;
    axpy(0.37, a.data(), y_v.data(), n);

    CHECK(d_v == doctest::Approx(d_s).epsilon(1e-13));
    CHECK(d3_v == doctest::Approx(d3_s).epsilon(1e-13));
    for (int c = 0; c < 3; ++c)
      CHECK(r3_v[c] == doctest::Approx(r3_s[c]).epsilon(1e-13));
    // FMA contraction may differ from the scalar path by an ulp
    for (std::size_t i = 0; i < n; ++i)
      REQUIRE(std::abs(y_v[i] - y_s[i]) <= 1e-15 * std::max(1.0, std::abs(y_s[i])));
  }
}

TEST_CASE("force_backend round-trips") {
  BackendGuard guard;
  force_backend(Backend::Scalar);
  CHECK(active_backend() == Backend::Scalar);
  reset_backend();
  // whatever the CPU supports, the result must be a valid enumerator
  const Backend b = active_backend();
  CHECK((b == Backend::Scalar || b == Backend::Avx2));
}
