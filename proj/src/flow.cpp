#include "fene/flow.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "fene/kernels.hpp"

namespace fene {

void FlowGrid::init() {
  if (nx < 4 || ny < 4) throw std::invalid_argument("FlowGrid: grid too small");
  if (!(lx > 0.0 && ly > 0.0)) throw std::invalid_argument("FlowGrid: domain size");
  hx = lx / nx;
  hy = ly / ny;
  wx.resize(nvert());
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) {
      double f = 1.0;
      if (i == 0 || i == nx) f *= 0.5;
      if (j == 0 || j == ny) f *= 0.5;
      wx[idx(i, j)] = f * hx * hy;
    }
}

namespace {

// Scalar H^1 Dirichlet form by compact edge differences (the usual 5-point
// stiffness scaled by the cell measure).
SpMat scalar_stiffness(const FlowGrid& g) {
  std::vector<Eigen::Triplet<double>> tr;
  const double cx = g.hy / g.hx, cy = g.hx / g.hy;
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      if (i < g.nx) {
        const int a = g.idx(i, j), b = g.idx(i + 1, j);
        tr.emplace_back(a, a, cx);
        tr.emplace_back(b, b, cx);
        tr.emplace_back(a, b, -cx);
        tr.emplace_back(b, a, -cx);
      }
      if (j < g.ny) {
        const int a = g.idx(i, j), b = g.idx(i, j + 1);
        tr.emplace_back(a, a, cy);
        tr.emplace_back(b, b, cy);
        tr.emplace_back(a, b, -cy);
        tr.emplace_back(b, a, -cy);
      }
    }
  SpMat m(g.nvert(), g.nvert());
  m.setFromTriplets(tr.begin(), tr.end());
  return m;
}

}  // namespace

StokesOperator::StokesOperator(const FlowGrid& grid) : grid_(grid) {
  const int nx = grid_.nx, ny = grid_.ny;
  ns_ = (nx - 1) * (ny - 1);
  auto sidx = [ny](int i, int j) { return (i - 1) * (ny - 1) + (j - 1); };

  // u = D_y phi, v = -D_x phi at interior vertices; boundary velocities zero.
  std::vector<Eigen::Triplet<double>> tu, tv;
  for (int i = 1; i < nx; ++i)
    for (int j = 1; j < ny; ++j) {
      const int row = grid_.idx(i, j);
      if (j + 1 < ny) tu.emplace_back(row, sidx(i, j + 1), 1.0 / (2.0 * grid_.hy));
      if (j - 1 >= 1) tu.emplace_back(row, sidx(i, j - 1), -1.0 / (2.0 * grid_.hy));
      if (i + 1 < nx) tv.emplace_back(row, sidx(i + 1, j), -1.0 / (2.0 * grid_.hx));
      if (i - 1 >= 1) tv.emplace_back(row, sidx(i - 1, j), 1.0 / (2.0 * grid_.hx));
    }
  cu_.resize(grid_.nvert(), ns_);
  cv_.resize(grid_.nvert(), ns_);
  cu_.setFromTriplets(tu.begin(), tu.end());
  cv_.setFromTriplets(tv.begin(), tv.end());

  SpMat w(grid_.nvert(), grid_.nvert());
  {
    std::vector<Eigen::Triplet<double>> tw;
    for (int i = 0; i < grid_.nvert(); ++i) tw.emplace_back(i, i, grid_.wx[i]);
    w.setFromTriplets(tw.begin(), tw.end());
  }
  const SpMat lw = scalar_stiffness(grid_);
  gram_ = SpMat(cu_.transpose() * w * cu_) + SpMat(cv_.transpose() * w * cv_);
  kform_ = SpMat(cu_.transpose() * lw * cu_) + SpMat(cv_.transpose() * lw * cv_);
  gram_.makeCompressed();
  kform_.makeCompressed();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(gram_)};
  if (es.info() != Eigen::Success)
    throw std::runtime_error("StokesOperator: Gram eigendecomposition failed (grid " +
                             std::to_string(grid_.nx) + "x" + std::to_string(grid_.ny) + ")");
  const Vec& ev = es.eigenvalues();
  const double tol = 1e-10 * ev[ns_ - 1];
  nfree_ = 0;
  for (int i = 0; i < ns_; ++i)
    if (ev[i] > tol) ++nfree_;
  if (nfree_ == 0)
    throw std::runtime_error("StokesOperator: velocity Gram matrix is zero");
  binv_.resize(ns_, nfree_);
  int c = 0;
  for (int i = 0; i < ns_; ++i)
    if (ev[i] > tol) binv_.col(c++) = es.eigenvectors().col(i) / std::sqrt(ev[i]);
}

Field2 StokesOperator::curl(const Vec& phi) const {
  Field2 f(grid_.nvert());
  f.u = cu_ * phi;
  f.v = cv_ * phi;
  return f;
}

Field2 StokesOperator::project(const Field2& w) const {
  Vec rhs = cu_.transpose() * grid_.wx.cwiseProduct(w.u) +
            cv_.transpose() * grid_.wx.cwiseProduct(w.v);
  Vec phi = binv_ * (binv_.transpose() * rhs);
  return curl(phi);
}

Field2 StokesOperator::laplacian(const Field2& w) const {
  // -Lap with Dirichlet data, via the stiffness form: (W^-1 Lw) per component.
  static thread_local SpMat lw_cache;
  if (lw_cache.rows() != grid_.nvert()) lw_cache = scalar_stiffness(grid_);
  Field2 out(grid_.nvert());
  out.u = (lw_cache * w.u).cwiseQuotient(grid_.wx);
  out.v = (lw_cache * w.v).cwiseQuotient(grid_.wx);
  return out;
}

Field2 StokesOperator::apply_stokes(const Field2& w) const { return project(laplacian(w)); }

StokesBasis StokesOperator::eigenbasis(int n) const {
  if (n < 1 || n > nfree_)
    throw std::invalid_argument("eigenbasis: n exceeds the divergence-free subspace dimension");
  // Reduced pencil on the G-orthonormalized coordinates: the columns of binv_
  // are G-orthonormal, so an ordinary symmetric eigensolve suffices.
  Eigen::MatrixXd kred = binv_.transpose() * (kform_ * binv_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kred);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenbasis: reduced eigensolve failed");
  StokesBasis b;
  b.lambda = es.eigenvalues().head(n);
  b.modes.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec phi = binv_ * es.eigenvectors().col(i);
    // fix sign deterministically: largest-|entry| component positive
    int imax = 0;
    phi.cwiseAbs().maxCoeff(&imax);
    if (phi[imax] < 0) phi = -phi;
    b.modes.push_back(curl(phi));
  }
  return b;
}

double StokesOperator::l2_inner(const Field2& a, const Field2& b) const {
  const auto& w = grid_.wx;
  return kernels::dot3(w.data(), a.u.data(), b.u.data(), w.size()) +
         kernels::dot3(w.data(), a.v.data(), b.v.data(), w.size());
}

double StokesOperator::l2_norm(const Field2& a) const {
  return std::sqrt(std::max(0.0, l2_inner(a, a)));
}

double StokesOperator::max_divergence(const Field2& a) const {
  double m = 0.0;
  for (int i = 1; i < grid_.nx; ++i)
    for (int j = 1; j < grid_.ny; ++j) {
      const double d =
          (a.u[grid_.idx(i + 1, j)] - a.u[grid_.idx(i - 1, j)]) / (2.0 * grid_.hx) +
          (a.v[grid_.idx(i, j + 1)] - a.v[grid_.idx(i, j - 1)]) / (2.0 * grid_.hy);
      m = std::max(m, std::abs(d));
    }
  return m;
}

Field2 advection_term(const FlowGrid& g, const Field2& u) {
  Field2 out(g.nvert());
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      const int c = g.idx(i, j);
      const double dxu = (u.u[g.idx(i + 1, j)] - u.u[g.idx(i - 1, j)]) / (2.0 * g.hx);
      const double dyu = (u.u[g.idx(i, j + 1)] - u.u[g.idx(i, j - 1)]) / (2.0 * g.hy);
      const double dxv = (u.v[g.idx(i + 1, j)] - u.v[g.idx(i - 1, j)]) / (2.0 * g.hx);
      const double dyv = (u.v[g.idx(i, j + 1)] - u.v[g.idx(i, j - 1)]) / (2.0 * g.hy);
      out.u[c] = u.u[c] * dxu + u.v[c] * dyu;
      out.v[c] = u.u[c] * dxv + u.v[c] * dyv;
    }
  return out;
}

namespace {
// one-sided 2nd-order derivative stencil along +s direction
inline double dside(double f0, double f1, double f2, double h, int s) {
  return s * (-1.5 * f0 + 2.0 * f1 - 0.5 * f2) / h;
}
}  // namespace

TensorField sigma_of_u(const FlowGrid& g, const Field2& u, SigmaMode mode) {
  TensorField t(g.nvert());
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const int c = g.idx(i, j);
      double dxu, dyu, dxv, dyv;
      if (i == 0 || i == g.nx) {
        const int s = (i == 0) ? 1 : -1;
        dxu = dside(u.u[c], u.u[g.idx(i + s, j)], u.u[g.idx(i + 2 * s, j)], g.hx, s);
        dxv = dside(u.v[c], u.v[g.idx(i + s, j)], u.v[g.idx(i + 2 * s, j)], g.hx, s);
      } else {
        dxu = (u.u[g.idx(i + 1, j)] - u.u[g.idx(i - 1, j)]) / (2.0 * g.hx);
        dxv = (u.v[g.idx(i + 1, j)] - u.v[g.idx(i - 1, j)]) / (2.0 * g.hx);
      }
      if (j == 0 || j == g.ny) {
        const int s = (j == 0) ? 1 : -1;
        dyu = dside(u.u[c], u.u[g.idx(i, j + s)], u.u[g.idx(i, j + 2 * s)], g.hy, s);
        dyv = dside(u.v[c], u.v[g.idx(i, j + s)], u.v[g.idx(i, j + 2 * s)], g.hy, s);
      } else {
        dyu = (u.u[g.idx(i, j + 1)] - u.u[g.idx(i, j - 1)]) / (2.0 * g.hy);
        dyv = (u.v[g.idx(i, j + 1)] - u.v[g.idx(i, j - 1)]) / (2.0 * g.hy);
      }
      if (mode == SigmaMode::Corotational) {
        t.a11[c] = 0.0;
        t.a22[c] = 0.0;
        t.a12[c] = dyu - dxv;
        t.a21[c] = dxv - dyu;
      } else {
        const double tr2 = 0.5 * (dxu + dyv);  // nonzero only from one-sided rows
        t.a11[c] = dxu - tr2;
        t.a12[c] = dyu;
        t.a21[c] = dxv;
        t.a22[c] = dyv - tr2;
      }
    }
  return t;
}

double grad_norm_sq(const FlowGrid& g, const Field2& u) {
  double s = 0.0;
  const double cx = g.hy / g.hx, cy = g.hx / g.hy;
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      if (i < g.nx) {
        const double du = u.u[g.idx(i + 1, j)] - u.u[g.idx(i, j)];
        const double dv = u.v[g.idx(i + 1, j)] - u.v[g.idx(i, j)];
        s += cx * (du * du + dv * dv);
      }
      if (j < g.ny) {
        const double du = u.u[g.idx(i, j + 1)] - u.u[g.idx(i, j)];
        const double dv = u.v[g.idx(i, j + 1)] - u.v[g.idx(i, j)];
        s += cy * (du * du + dv * dv);
      }
    }
  return s;
}

Vec project_Pn(const StokesOperator& op, const StokesBasis& basis, const Field2& w) {
  Vec c(basis.n());
  for (int i = 0; i < basis.n(); ++i) c[i] = op.l2_inner(w, basis.modes[i]);
  return c;
}

Field2 reconstruct(const StokesBasis& basis, const Vec& coef) {
  if (basis.n() == 0) throw std::invalid_argument("reconstruct: empty basis");
  const int n = static_cast<int>(basis.modes[0].u.size());
  Field2 f(n);
  for (int i = 0; i < basis.n(); ++i) {
    kernels::axpy(coef[i], basis.modes[i].u.data(), f.u.data(), n);
    kernels::axpy(coef[i], basis.modes[i].v.data(), f.v.data(), n);
  }
  return f;
}

void viscous_semigroup_step(Vec& coef, const StokesBasis& basis, double alpha1, double dt) {
  if (dt < 0) throw std::invalid_argument("viscous_semigroup_step: dt must be >= 0");
  for (int i = 0; i < basis.n(); ++i) coef[i] *= std::exp(-alpha1 * basis.lambda[i] * dt);
}

// Cache ----------------------------------------------------------------------

std::string basis_cache_key(const FlowGrid& g, int n) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const std::int32_t version = 2;
  mix(&version, sizeof version);
  mix(&g.nx, sizeof g.nx);
  mix(&g.ny, sizeof g.ny);
  mix(&g.lx, sizeof g.lx);
  mix(&g.ly, sizeof g.ly);
  mix(&n, sizeof n);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("stokes_basis_") + buf + ".bin";
}

bool load_basis_cache(const std::string& dir, const FlowGrid& g, int n, StokesBasis& out) {
  const auto path = std::filesystem::path(dir) / basis_cache_key(g, n);
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) return false;
  bool ok = true;
  std::int32_t nn = 0, nv = 0;
  ok = ok && std::fread(&nn, sizeof nn, 1, fp) == 1;
  ok = ok && std::fread(&nv, sizeof nv, 1, fp) == 1;
  if (ok && (nn != n || nv != g.nvert())) ok = false;
  if (ok) {
    out.lambda.resize(n);
    out.modes.assign(n, Field2(g.nvert()));
    ok = std::fread(out.lambda.data(), sizeof(double), n, fp) == static_cast<size_t>(n);
    for (int i = 0; ok && i < n; ++i) {
      ok = std::fread(out.modes[i].u.data(), sizeof(double), nv, fp) == static_cast<size_t>(nv) &&
           std::fread(out.modes[i].v.data(), sizeof(double), nv, fp) == static_cast<size_t>(nv);
    }
  }
  std::fclose(fp);
  return ok;
}

void save_basis_cache(const std::string& dir, const FlowGrid& g, int n,
                      const StokesBasis& basis) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / basis_cache_key(g, n);
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("save_basis_cache: cannot open " + path.string());
  const std::int32_t nn = n, nv = g.nvert();
  std::fwrite(&nn, sizeof nn, 1, fp);
  std::fwrite(&nv, sizeof nv, 1, fp);
  std::fwrite(basis.lambda.data(), sizeof(double), n, fp);
  for (int i = 0; i < n; ++i) {
    std::fwrite(basis.modes[i].u.data(), sizeof(double), nv, fp);
    std::fwrite(basis.modes[i].v.data(), sizeof(double), nv, fp);
  }
  std::fclose(fp);
}

}  // namespace fene
