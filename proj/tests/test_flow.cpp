#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "fene/flow.hpp"

using namespace fene;

namespace {

Field2 random_field(const FlowGrid& g, std::mt19937& rng, bool zero_boundary = true) {
  std::normal_distribution<double> d(0.0, 1.0);
  Field2 f(g.nvert());
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      if (zero_boundary && g.boundary(i, j)) continue;
      f.u[g.idx(i, j)] = d(rng);
      f.v[g.idx(i, j)] = d(rng);
    }
  return f;
}

double field_max_diff(const Field2& a, const Field2& b) {
  return std::max((a.u - b.u).cwiseAbs().maxCoeff(), (a.v - b.v).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("trapezoid vertex weights integrate to the domain area") {
  FlowGrid g(12, 20, 2.0, 1.5);
  CHECK(g.wx.sum() == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(g.hx == doctest::Approx(2.0 / 12).epsilon(1e-15));
  CHECK_THROWS_AS(FlowGrid(2, 8, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FlowGrid(8, 8, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("curl fields are discretely divergence-free; projection fixes them") {
  FlowGrid g(16, 16, 1.0, 1.0);
  StokesOperator op(g);
  std::mt19937 rng(5);
  std::normal_distribution<double> d(0.0, 1.0);
  Vec phi(op.n_stream());
  for (int i = 0; i < phi.size(); ++i) phi[i] = d(rng);
  Field2 w = op.curl(phi);
  CHECK(op.max_divergence(w) < 1e-11 * std::max(1.0, w.u.cwiseAbs().maxCoeff()));
  Field2 pw = op.project(w);
  CHECK(field_max_diff(pw, w) < 1e-10 * std::max(1.0, w.u.cwiseAbs().maxCoeff()));
}

TEST_CASE("projection is idempotent, divergence-free and orthogonal") {
  FlowGrid g(16, 16, 1.0, 1.0);
  StokesOperator op(g);
  std::mt19937 rng(9);
  Field2 w = random_field(g, rng);
  Field2 p1 = op.project(w);
  Field2 p2 = op.project(p1);
  CHECK(field_max_diff(p1, p2) < 1e-12 * std::max(1.0, p1.u.cwiseAbs().maxCoeff()));
  CHECK(op.max_divergence(p1) < 1e-10);
  // residual is L^2-orthogonal to the projection
  Field2 r(g.nvert());
  r.u = w.u - p1.u;
  r.v = w.v - p1.v;
  CHECK(std::abs(op.l2_inner(r, p1)) < 1e-12 * std::max(1.0, op.l2_norm(w)));
  // projection never increases the norm
  CHECK(op.l2_norm(p1) <= op.l2_norm(w) * (1.0 + 1e-13));
}

TEST_CASE("eigenbasis: ordered, orthonormal, exact Galerkin residuals") {
  FlowGrid g(16, 16, 1.0, 1.0);
  StokesOperator op(g);
  const int n = 8;
  StokesBasis b = op.eigenbasis(n);
  REQUIRE(b.n() == n);
  for (int i = 0; i + 1 < n; ++i) CHECK(b.lambda[i] <= b.lambda[i + 1] + 1e-12);
  CHECK(b.lambda[0] > 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double ip = op.l2_inner(b.modes[i], b.modes[j]);
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-11);
    }
    // A v = lambda v by construction of the reduced pencil
    Field2 av = op.apply_stokes(b.modes[i]);
    Field2 resid(g.nvert());
    resid.u = av.u - b.lambda[i] * b.modes[i].u;
    resid.v = av.v - b.lambda[i] * b.modes[i].v;
    CHECK(op.l2_norm(resid) < 1e-7 * b.lambda[i]);
    // Rayleigh quotient and the edge-difference seminorm agree with lambda
    CHECK(op.l2_inner(b.modes[i], av) == doctest::Approx(b.lambda[i]).epsilon(1e-10));
    CHECK(grad_norm_sq(g, b.modes[i]) == doctest::Approx(b.lambda[i]).epsilon(1e-10));
    CHECK(op.max_divergence(b.modes[i]) < 1e-11);
  }
  CHECK_THROWS_AS(op.eigenbasis(0), std::invalid_argument);
  CHECK_THROWS_AS(op.eigenbasis(op.n_free() + 1), std::invalid_argument);
}

TEST_CASE("first Stokes eigenvalue is near the continuum value on the square") {
  // lambda_1 of the Stokes operator on the unit square with no-slip walls
  // is ~52.3; the second-order scheme at h=1/24 should land within ~2%.
  FlowGrid g(24, 24, 1.0, 1.0);
  StokesOperator op(g);
  StokesBasis b = op.eigenbasis(1);
  CHECK(b.lambda[0] == doctest::Approx(52.34).epsilon(0.03));
}

TEST_CASE("coefficient-space helpers: roundtrip, semigroup, reconstruction") {
  FlowGrid g(12, 12, 1.0, 1.0);
  StokesOperator op(g);
  StokesBasis b = op.eigenbasis(5);
  Vec c0(5);
  c0 << 0.3, -0.1, 0.05, 0.0, -0.7;
  Field2 u = reconstruct(b, c0);
  Vec c1 = project_Pn(op, b, u);
  CHECK((c1 - c0).cwiseAbs().maxCoeff() < 1e-11);

  Vec a = c0, s = c0;
  viscous_semigroup_step(a, b, 0.5, 0.3);
  viscous_semigroup_step(s, b, 0.5, 0.1);
  viscous_semigroup_step(s, b, 0.5, 0.2);
  CHECK((a - s).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(viscous_semigroup_step(a, b, 0.5, -0.1), std::invalid_argument);
}

TEST_CASE("sigma_of_u is exact on affine velocity fields") {
  FlowGrid g(10, 14, 1.0, 1.4);
  const double a = 0.7, bb = -0.4, c = 1.1;  // grad u = [[a, bb], [c, -a]]
  Field2 u(g.nvert());
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double x = i * g.hx, y = j * g.hy;
      u.u[g.idx(i, j)] = a * x + bb * y;
      u.v[g.idx(i, j)] = c * x - a * y;
    }
  TensorField t = sigma_of_u(g, u, SigmaMode::General);
  for (int v = 0; v < g.nvert(); ++v) {
    CHECK(t.a11[v] == doctest::Approx(a).epsilon(1e-10));
    CHECK(t.a12[v] == doctest::Approx(bb).epsilon(1e-10));
    CHECK(t.a21[v] == doctest::Approx(c).epsilon(1e-10));
    CHECK(t.a22[v] == doctest::Approx(-a).epsilon(1e-10));
  }
  TensorField tc = sigma_of_u(g, u, SigmaMode::Corotational);
  for (int v = 0; v < g.nvert(); ++v) {
    CHECK(tc.a11[v] == 0.0);
    CHECK(tc.a22[v] == 0.0);
    CHECK(tc.a12[v] == doctest::Approx(bb - c).epsilon(1e-10));
    CHECK(tc.a21[v] == doctest::Approx(c - bb).epsilon(1e-10));
  }
}

TEST_CASE("advection term is exact on quadratic fields at interior vertices") {
  FlowGrid g(10, 10, 1.0, 1.0);
  Field2 u(g.nvert());
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double x = i * g.hx, y = j * g.hy;
      u.u[g.idx(i, j)] = x * x;
      u.v[g.idx(i, j)] = x * y;
    }
  Field2 adv = advection_term(g, u);
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      const double x = i * g.hx, y = j * g.hy;
      CHECK(adv.u[g.idx(i, j)] == doctest::Approx(2.0 * x * x * x).epsilon(1e-11));
      CHECK(adv.v[g.idx(i, j)] == doctest::Approx(2.0 * x * x * y).epsilon(1e-11));
    }
}

TEST_CASE("basis cache round trip and key sensitivity") {
  FlowGrid g(8, 8, 1.0, 1.0);
  StokesOperator op(g);
  StokesBasis b = op.eigenbasis(3);
  const auto dir = std::filesystem::temp_directory_path() / "fene_basis_cache_test";
  std::filesystem::remove_all(dir);
  save_basis_cache(dir.string(), g, 3, b);

  StokesBasis back;
  REQUIRE(load_basis_cache(dir.string(), g, 3, back));
  CHECK((back.lambda - b.lambda).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(field_max_diff(back.modes[i], b.modes[i]) == 0.0);

  StokesBasis miss;
  CHECK_FALSE(load_basis_cache(dir.string(), g, 4, miss));  // different mode count
  FlowGrid g2(8, 8, 2.0, 1.0);
  CHECK_FALSE(load_basis_cache(dir.string(), g2, 3, miss));  // different geometry
  CHECK(basis_cache_key(g, 3) != basis_cache_key(g2, 3));
  std::filesystem::remove_all(dir);
}
