#include "fene/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fene/kernels.hpp"
#include "fene/ledger.hpp"
#include "fene/state_io.hpp"

namespace fene {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mass_target(const DerivedParams& d) { return 1.0 / (d.r_param * d.r_param); }

}  // namespace

CoupledSolver::CoupledSolver(const PhysicalParams& phys, const FlowGrid& fgrid,
                             int n_modes, int q_nr, int q_ntheta,
                             const std::string& basis_cache_dir)
    : phys_(phys), derived_(derive_params(phys)), fgrid_(fgrid) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  qgrid_ = std::make_shared<QGrid>(q_nr, q_ntheta, derived_.delta);
  stokes_ = std::make_shared<StokesOperator>(fgrid_);
  bool cached = !basis_cache_dir.empty() &&
                load_basis_cache(basis_cache_dir, fgrid_, n_modes, basis_);
  if (!cached) {
    basis_ = stokes_->eigenbasis(n_modes);
    if (!basis_cache_dir.empty()) save_basis_cache(basis_cache_dir, fgrid_, n_modes, basis_);
  }
  h_eq_ = mass_target(derived_) / qgrid_->q_mass_h(Vec::Ones(qgrid_->size()));
  min_dr_ = 1.0;
  const Vec& r = qgrid_->r();
  for (int j = 0; j + 1 < r.size(); ++j) min_dr_ = std::min(min_dr_, r[j + 1] - r[j]);
}

CoupledState CoupledSolver::make_state(const Scenario& sc) const {
  const int nq = qgrid_->size();
  const int nc = fgrid_.nvert();
  const double target = mass_target(derived_);

  CoupledState st;
  st.t = 0.0;
  st.coef = Vec::Zero(basis_.n());
  if (sc.u0_mode > 0) {
    if (sc.u0_mode > basis_.n())
      throw std::invalid_argument("u0_mode exceeds the number of basis modes");
    st.coef[sc.u0_mode - 1] = sc.u0_amplitude;
  }
  st.u_nodal = reconstruct(basis_, st.coef);

  switch (sc.init.kind) {
    case InitSpec::Kind::Equilibrium:
      st.f.h = Eigen::MatrixXd::Constant(nq, nc, h_eq_);
      break;
    case InitSpec::Kind::File:
      st.f.h = load_h_field(sc.init.file_path, *qgrid_).h;
      if (st.f.h.cols() != nc)
        throw std::invalid_argument("initial field file: cell count mismatch");
      break;
    case InitSpec::Kind::Perturbed: {
      // q-space factor with exactly zero discrete q-mass.
      const Vec& qx = qgrid_->qx();
      const Vec& qy = qgrid_->qy();
      const Vec& wm = qgrid_->mass_weights();
      auto normalized = [](Vec g) {
        const double m = g.cwiseAbs().maxCoeff();
        if (m > 0) g /= m;
        return g;
      };
      Vec g;
      const std::string& pat = sc.init.pattern;
      if (pat == "q1") {
        g = qx;
      } else if (pat == "q2") {
        g = qy;
      } else if (pat == "shear") {
        g = qx.cwiseProduct(qy);
      } else if (pat == "radial" || pat == "mixed") {
        Vec r2 = qx.cwiseProduct(qx) + qy.cwiseProduct(qy);
        const double c = wm.dot(r2) / wm.sum();
        Vec rad = r2.array() - c;
        if (pat == "radial")
          g = rad;
        else
          g = normalized(qx) + normalized(qx.cwiseProduct(qy)) + normalized(rad);
      } else {
        throw std::invalid_argument("unknown init pattern: " + pat);
      }
      g = normalized(g);

      Vec env(nc);
      if (sc.init.envelope == "uniform") {
        env.setOnes();
      } else if (sc.init.envelope == "bump") {
        for (int i = 0; i <= fgrid_.nx; ++i)
          for (int j = 0; j <= fgrid_.ny; ++j) {
            const double sx = std::sin(kPi * (i * fgrid_.hx) / fgrid_.lx);
            const double sy = std::sin(kPi * (j * fgrid_.hy) / fgrid_.ly);
            env[fgrid_.idx(i, j)] = sx * sx * sy * sy;
          }
      } else {
        throw std::invalid_argument("unknown init envelope: " + sc.init.envelope);
      }

      if (sc.init.epsilon * env.maxCoeff() >= 1.0)
        throw std::invalid_argument("init epsilon too large: f0 would be negative");

      st.f.h.resize(nq, nc);
      for (int v = 0; v < nc; ++v)
        st.f.h.col(v) = h_eq_ * (Vec::Ones(nq) + sc.init.epsilon * env[v] * g);
      break;
    }
  }

  // Optional sign/mass-preserving spatial smoothing (convex neighbor average).
  for (int pass = 0; pass < sc.init.smooth_passes; ++pass) {
    Eigen::MatrixXd hn = st.f.h;
    for (int i = 0; i <= fgrid_.nx; ++i)
      for (int j = 0; j <= fgrid_.ny; ++j) {
        const int v = fgrid_.idx(i, j);
        Vec acc = 4.0 * st.f.h.col(v);
        auto nb = [&](int ii, int jj) -> Vec {
          if (ii < 0 || jj < 0 || ii > fgrid_.nx || jj > fgrid_.ny)
            return st.f.h.col(v);
          return st.f.h.col(fgrid_.idx(ii, jj));
        };
        acc += nb(i - 1, j) + nb(i + 1, j) + nb(i, j - 1) + nb(i, j + 1);
        hn.col(v) = acc / 8.0;
      }
    st.f.h.swap(hn);
  }

  // Exact per-cell normalization of the q-mass constraint.
  const Vec& wm = qgrid_->mass_weights();
  for (int v = 0; v < nc; ++v) {
    const double m = kernels::dot(wm.data(), st.f.h.col(v).data(), (std::size_t)nq);
    if (!(m > 0)) throw std::invalid_argument("initial field has nonpositive q-mass");
    st.f.h.col(v) *= target / m;
  }
  return st;
}

// Transport -------------------------------------------------------------

namespace {

// Skew-symmetric Eulerian tendency -1/2[u.grad h + div(u h)]; the column
// coefficients sum to -1/2 div_h(u) = 0 on a discretely divergence-free
// field, so every cell's q-mass is invariant stage by stage.
void eulerian_tendency(const FlowGrid& g, const Field2& u, const Eigen::MatrixXd& h,
                       Eigen::MatrixXd& t) {
  t.setZero();
  const double ax = 1.0 / (4.0 * g.hx), ay = 1.0 / (4.0 * g.hy);
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      const int v = g.idx(i, j);
      const int e = g.idx(i + 1, j), w = g.idx(i - 1, j);
      const int n = g.idx(i, j + 1), s = g.idx(i, j - 1);
      const double ce = (u.u[v] + u.u[e]) * ax, cw = (u.u[v] + u.u[w]) * ax;
      const double cn = (u.v[v] + u.v[n]) * ay, cs = (u.v[v] + u.v[s]) * ay;
      t.col(v) = cw * h.col(w) - ce * h.col(e) + cs * h.col(s) - cn * h.col(n);
    }
}

}  // namespace

void CoupledSolver::transport_substep(const Field2& u, double dt, TransportScheme scheme,
                                      ConfigField& f) const {
  const FlowGrid& g = fgrid_;
  if (scheme == TransportScheme::Eulerian) {
    // Heun RK2 on the skew form.
    Eigen::MatrixXd k1(f.h.rows(), f.h.cols()), k2(f.h.rows(), f.h.cols());
    eulerian_tendency(g, u, f.h, k1);
    Eigen::MatrixXd h1 = f.h + dt * k1;
    eulerian_tendency(g, u, h1, k2);
    f.h += (0.5 * dt) * (k1 + k2);
    return;
  }
  // Semi-Lagrangian: backtrack each interior vertex, bilinear gather. The
  // weights are a convex combination, so mass and sign are preserved.
  Eigen::MatrixXd hn = f.h;
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      const int v = g.idx(i, j);
      double x = i * g.hx - dt * u.u[v];
      double y = j * g.hy - dt * u.v[v];
      x = std::clamp(x, 0.0, g.lx);
      y = std::clamp(y, 0.0, g.ly);
      int i0 = std::min((int)(x / g.hx), g.nx - 1);
      int j0 = std::min((int)(y / g.hy), g.ny - 1);
      const double tx = x / g.hx - i0, ty = y / g.hy - j0;
      hn.col(v) = (1 - tx) * (1 - ty) * f.h.col(g.idx(i0, j0)) +
                  tx * (1 - ty) * f.h.col(g.idx(i0 + 1, j0)) +
                  (1 - tx) * ty * f.h.col(g.idx(i0, j0 + 1)) +
                  tx * ty * f.h.col(g.idx(i0 + 1, j0 + 1));
    }
  f.h.swap(hn);
}

// Fokker-Planck ----------------------------------------------------------

void CoupledSolver::fp_substep(const Sigma2& sigma, const FpDiffusionSolver& diff,
                               double dt, double* h_cell) const {
  const int nq = qgrid_->size();
  thread_local Vec fbuf, gbuf, hbuf;
  fbuf.resize(nq);
  hbuf.resize(nq);
  Eigen::Map<Vec> h(h_cell, nq);
  const double snorm = std::abs(sigma.a11) + std::abs(sigma.a12) +
                       std::abs(sigma.a21) + std::abs(sigma.a22);
  if (snorm > 0) {
    gbuf.resize(nq);
    fbuf = h.cwiseProduct(qgrid_->m_node());
    qgrid_->apply_drift_inplace(sigma, fbuf.data(), gbuf.data());
    kernels::axpy(dt, gbuf.data(), fbuf.data(), (std::size_t)nq);
    hbuf = fbuf.cwiseQuotient(qgrid_->m_node());
  } else {
    hbuf = h;
  }
  diff.solve_inplace(hbuf);
  h = hbuf;
}

void CoupledSolver::fp_substep_all(const Field2& u, SigmaMode mode,
                                   const FpDiffusionSolver& diff, double dt,
                                   ConfigField& f) const {
  TensorField sig = sigma_of_u(fgrid_, u, mode);
  for (int v = 0; v < fgrid_.nvert(); ++v)
    fp_substep(sigma_at(sig, v), diff, dt, f.h.col(v).data());
}

Sigma2 CoupledSolver::sigma_at(const TensorField& t, int cell) const {
  return Sigma2{t.a11[cell], t.a12[cell], t.a21[cell], t.a22[cell]};
}

// Momentum ----------------------------------------------------------------

Field2 CoupledSolver::stress_divergence(const ConfigField& f) const {
  const FlowGrid& g = fgrid_;
  const int nv = g.nvert();
  Vec s11(nv), s12(nv), s22(nv);
  for (int v = 0; v < nv; ++v) {
    auto s = qgrid_->kramers_stress_h(f.h.col(v).data());
    s11[v] = s[0];
    s12[v] = s[1];
    s22[v] = s[2];
  }
  Field2 F(nv);
  const double cx = derived_.alpha2 / (2.0 * g.hx);
  const double cy = derived_.alpha2 / (2.0 * g.hy);
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      const int v = g.idx(i, j);
      const int e = g.idx(i + 1, j), w = g.idx(i - 1, j);
      const int n = g.idx(i, j + 1), s = g.idx(i, j - 1);
      F.u[v] = cx * (s11[e] - s11[w]) + cy * (s12[n] - s12[s]);
      F.v[v] = cx * (s12[e] - s12[w]) + cy * (s22[n] - s22[s]);
    }
  return F;
}

namespace {

// c+ = e^{-a} c + dt phi1(-a) d with a = alpha1 lambda dt (exact on the
// linear viscous part).
void exp_euler(Vec& coef, const Vec& lambda, double alpha1, double dt, const Vec& d) {
  for (int i = 0; i < coef.size(); ++i) {
    const double a = alpha1 * lambda[i] * dt;
    const double e = std::exp(-a);
    const double phi1 = (a > 1e-8) ? (1.0 - e) / a : 1.0 - 0.5 * a + a * a / 6.0;
    coef[i] = e * coef[i] + dt * phi1 * d[i];
  }
}

}  // namespace

void CoupledSolver::momentum_substep(CoupledState& st, double dt) const {
  Field2 adv = advection_term(fgrid_, st.u_nodal);
  Field2 rhs = stress_divergence(st.f);
  rhs.u -= adv.u;
  rhs.v -= adv.v;
  Vec d = project_Pn(*stokes_, basis_, rhs);
  exp_euler(st.coef, basis_.lambda, derived_.alpha1, dt, d);
  st.u_nodal = reconstruct(basis_, st.coef);
}

int CoupledSolver::picard_step(CoupledState& st, double dt, int k_max, double tol,
                               SigmaMode mode, TransportScheme transport) const {
  const Eigen::MatrixXd h0 = st.f.h;
  const Vec c0 = st.coef;
  FpDiffusionSolver diff(*qgrid_, derived_.alpha3, dt);

  Vec c_prev = c0;
  Field2 u_k = st.u_nodal;
  ConfigField trial;
  double err = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    trial.h = h0;
    transport_substep(u_k, dt, transport, trial);
    fp_substep_all(u_k, mode, diff, dt, trial);
    Field2 adv = advection_term(fgrid_, u_k);
    Field2 rhs = stress_divergence(trial);
    rhs.u -= adv.u;
    rhs.v -= adv.v;
    Vec d = project_Pn(*stokes_, basis_, rhs);
    Vec c_new = c0;
    exp_euler(c_new, basis_.lambda, derived_.alpha1, dt, d);
    err = (c_new - c_prev).norm();
    u_k = reconstruct(basis_, c_new);
    c_prev = c_new;
    if (err <= tol * std::max(1.0, c0.norm())) {
      st.f.h = std::move(trial.h);
      st.coef = std::move(c_new);
      st.u_nodal = std::move(u_k);
      st.last_picard_iters = k;
      return k;
    }
  }
  throw std::runtime_error("picard iteration did not converge in " +
                           std::to_string(k_max) + " iterations (last update " +
                           std::to_string(err) + "); reduce dt");
}

void CoupledSolver::advance(CoupledState& st, const Scenario& sc,
                            const FpDiffusionSolver& diff) const {
  const double dt = sc.dt;
  switch (sc.splitting) {
    case SplittingMode::Lie:
      if (std::abs(diff.dt() - dt) > 1e-12 * dt)
        throw std::logic_error("diffusion solver dt mismatch (Lie expects dt)");
      transport_substep(st.u_nodal, dt, sc.transport, st.f);
      fp_substep_all(st.u_nodal, sc.sigma_mode, diff, dt, st.f);
      momentum_substep(st, dt);
      break;
    case SplittingMode::Strang:
      if (std::abs(diff.dt() - 0.5 * dt) > 1e-12 * dt)
        throw std::logic_error("diffusion solver dt mismatch (Strang expects dt/2)");
      transport_substep(st.u_nodal, 0.5 * dt, sc.transport, st.f);
      fp_substep_all(st.u_nodal, sc.sigma_mode, diff, 0.5 * dt, st.f);
      momentum_substep(st, dt);
      fp_substep_all(st.u_nodal, sc.sigma_mode, diff, 0.5 * dt, st.f);
      transport_substep(st.u_nodal, 0.5 * dt, sc.transport, st.f);
      break;
    case SplittingMode::Picard:
      st.last_picard_iters =
          picard_step(st, dt, sc.picard_kmax, sc.picard_tol, sc.sigma_mode, sc.transport);
      break;
  }
  st.t += dt;
}

// Run loop ------------------------------------------------------------------

CoupledSolver::RunResult CoupledSolver::run(const Scenario& sc, const SampleHook& hook,
                                            const CoupledState* init) const {
  if (!(sc.dt > 0) || !(sc.t_end > 0))
    throw std::invalid_argument("dt and t_end must be positive");
  const double steps_f = sc.t_end / sc.dt;
  const long long nsteps = std::llround(steps_f);
  if (nsteps < 1 || std::abs(steps_f - (double)nsteps) > 1e-8 * steps_f)
    throw std::invalid_argument("t_end must be an integer multiple of dt");

  CoupledState st = init ? *init : make_state(sc);
  const double fp_dt = (sc.splitting == SplittingMode::Strang) ? 0.5 * sc.dt : sc.dt;
  FpDiffusionSolver diff(*qgrid_, derived_.alpha3, fp_dt);
  DiagnosticsComputer comp(*this);
  const double target = mass_target(derived_);

  RunResult res;
  res.positivity_min = std::numeric_limits<double>::infinity();

  auto cell_scan = [&](double& dev_max, double& pos_min) {
    dev_max = 0;
    pos_min = std::numeric_limits<double>::infinity();
    for (int v = 0; v < fgrid_.nvert(); ++v) {
      dev_max = std::max(dev_max, std::abs(cell_q_mass(st, v) - target));
      pos_min = std::min(pos_min, cell_positivity_min(st, v));
    }
  };

  EnergyContext ctx;
  ctx.u0_sq = comp.u_l2_sq(st);
  ctx.psi0_sq = comp.psi_l2m_sq(st);

  double dev0, pos0;
  cell_scan(dev0, pos0);
  res.mass_dev_max = dev0;
  res.positivity_min = pos0;

  double prev_psi_sq = ctx.psi0_sq;
  {
    DiagnosticsRecord rec = comp.energy_ledger(st, &ctx);
    rec.mass_dev_max = dev0;
    rec.positivity_min = pos0;
    rec.coupling_residual = comp.coupling_residual(st);
    res.records.push_back(rec);
    if (hook) hook(st, rec);
  }

  for (long long step = 1; step <= nsteps; ++step) {
    const double lim = sc.cfl * cfl_dt_limit(st.u_nodal, sc.sigma_mode);
    if (sc.dt > lim)
      throw std::runtime_error("transport CFL violation at step " + std::to_string(step) +
                               ": dt=" + std::to_string(sc.dt) +
                               " exceeds limit " + std::to_string(lim));
    advance(st, sc, diff);
    if (sc.clipping) apply_clip(st.f);

    double dev, pos;
    cell_scan(dev, pos);
    res.mass_dev_max = std::max(res.mass_dev_max, dev);
    res.positivity_min = std::min(res.positivity_min, pos);

    ctx.diss_sum += derived_.alpha1 * sc.dt * comp.grad_u_sq(st);
    const double psq = comp.psi_l2m_sq(st);

    if (step % sc.sample_every == 0 || step == nsteps) {
      DiagnosticsRecord rec = comp.energy_ledger(st, &ctx);
      rec.mass_dev_max = dev;
      rec.positivity_min = pos;
      rec.corot_residual =
          (psq - prev_psi_sq) / sc.dt + 2.0 * derived_.alpha3 * comp.psi_hdot_sq(st);
      rec.coupling_residual = comp.coupling_residual(st);
      res.records.push_back(rec);
      if (hook) hook(st, rec);
    }
    prev_psi_sq = psq;
  }
  return res;
}

// Per-cell scalars ------------------------------------------------------

double CoupledSolver::cell_q_mass(const CoupledState& st, int cell) const {
  const Vec& wm = qgrid_->mass_weights();
  return kernels::dot(wm.data(), st.f.h.col(cell).data(), (std::size_t)qgrid_->size());
}

double CoupledSolver::cell_positivity_min(const CoupledState& st, int cell) const {
  const Vec& m = qgrid_->m_node();
  const double* h = st.f.h.col(cell).data();
  double mn = std::numeric_limits<double>::infinity();
  for (int iq = 0; iq < qgrid_->size(); ++iq) mn = std::min(mn, h[iq] * m[iq]);
  return mn;
}

double CoupledSolver::cfl_dt_limit(const Field2& u, SigmaMode mode) const {
  double vmax = 0;
  for (int v = 0; v < fgrid_.nvert(); ++v)
    vmax = std::max(vmax, std::max(std::abs(u.u[v]), std::abs(u.v[v])));
  double lim = std::numeric_limits<double>::infinity();
  if (vmax > 0) lim = std::min(fgrid_.hx, fgrid_.hy) / vmax;

  TensorField sig = sigma_of_u(fgrid_, u, mode);
  double smax = 0;
  for (int v = 0; v < fgrid_.nvert(); ++v) {
    const double row = std::max(std::abs(sig.a11[v]) + std::abs(sig.a12[v]),
                                std::abs(sig.a21[v]) + std::abs(sig.a22[v]));
    smax = std::max(smax, row);
  }
  if (smax > 0) lim = std::min(lim, std::min(min_dr_, qgrid_->dtheta()) / smax);
  return lim;
}

void CoupledSolver::apply_clip(ConfigField& f) const {
  const Vec& wm = qgrid_->mass_weights();
  const double target = mass_target(derived_);
  for (int v = 0; v < f.h.cols(); ++v) {
    f.h.col(v) = f.h.col(v).cwiseMax(0.0);
    const double m = kernels::dot(wm.data(), f.h.col(v).data(), (std::size_t)qgrid_->size());
    if (m > 0) f.h.col(v) *= target / m;
  }
}

}  // namespace fene
