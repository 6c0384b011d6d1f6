#include "fene/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fene/ledger.hpp"
#include "fene/solver.hpp"

namespace fene {

const char* const kDiagnosticsCsvHeader =
    "t,u_l2,grad_u_l2,psi_l2m,psi_hdot,mass_dev_max,positivity_min,"
    "corot_residual,energy_margin,coupling_residual,picard_iters";

std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d",
                r.t, r.u_l2, r.grad_u_l2, r.psi_l2m, r.psi_hdot, r.mass_dev_max,
                r.positivity_min, r.corot_residual, r.energy_margin,
                r.coupling_residual, r.picard_iters);
  return std::string(buf);
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& recs) {
  os << kDiagnosticsCsvHeader << '\n';
  for (const auto& r : recs) os << diagnostics_csv_row(r) << '\n';
}

void write_diagnostics_csv_file(const std::string& path,
                                const std::vector<DiagnosticsRecord>& recs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_diagnostics_csv(os, recs);
}

std::vector<DiagnosticsRecord> read_diagnostics_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty diagnostics file: " + path);
  if (line != kDiagnosticsCsvHeader)
    throw std::runtime_error("unexpected diagnostics header in " + path);
  std::vector<DiagnosticsRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    DiagnosticsRecord r;
    int n = std::sscanf(line.c_str(),
                        "%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d", &r.t,
                        &r.u_l2, &r.grad_u_l2, &r.psi_l2m, &r.psi_hdot,
                        &r.mass_dev_max, &r.positivity_min, &r.corot_residual,
                        &r.energy_margin, &r.coupling_residual, &r.picard_iters);
    if (n != 11)
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(lineno));
    out.push_back(r);
  }
  return out;
}

// DiagnosticsComputer --------------------------------------------------------

DiagnosticsComputer::DiagnosticsComputer(const CoupledSolver& s) : s_(&s) {
  const QGrid& q = s.qgrid();
  Vec heq = Vec::Constant(q.size(), s.h_equilibrium());
  stress_eq_ = q.kramers_stress_h(heq.data());
}

double DiagnosticsComputer::psi_l2m_sq(const CoupledState& st) const {
  const QGrid& q = s_->qgrid();
  const FlowGrid& g = s_->fgrid();
  const Vec& wm = q.mass_weights();
  const double a = s_->h_equilibrium();
  double acc = 0;
  for (int v = 0; v < g.nvert(); ++v) {
    double cell = 0;
    const double* h = st.f.h.col(v).data();
    for (int iq = 0; iq < q.size(); ++iq) {
      const double d = h[iq] - a;
      cell += wm[iq] * d * d;
    }
    acc += g.wx[v] * cell;
  }
  return acc;
}

double DiagnosticsComputer::psi_hdot_sq(const CoupledState& st) const {
  const QGrid& q = s_->qgrid();
  const FlowGrid& g = s_->fgrid();
  const SpMat& K = q.stiffness();
  double acc = 0;
  Vec kh(q.size());
  for (int v = 0; v < g.nvert(); ++v) {
    kh.noalias() = K * st.f.h.col(v);
    acc += g.wx[v] * st.f.h.col(v).dot(kh);
  }
  return acc;
}

double DiagnosticsComputer::u_l2_sq(const CoupledState& st) const {
  return st.coef.squaredNorm();
}

double DiagnosticsComputer::grad_u_sq(const CoupledState& st) const {
  const Vec& lam = s_->basis().lambda;
  double acc = 0;
  for (int i = 0; i < st.coef.size(); ++i) acc += lam[i] * st.coef[i] * st.coef[i];
  return acc;
}

double DiagnosticsComputer::coupling_residual(const CoupledState& st) const {
  const QGrid& q = s_->qgrid();
  const FlowGrid& g = s_->fgrid();
  const double a = s_->h_equilibrium();
  const double two_delta = 2.0 * s_->derived().delta;

  // <div_x tau(psi), u>, stress scale removed.
  Field2 F = s_->stress_divergence(st.f);
  double term1 = s_->stokes().l2_inner(F, st.u_nodal) / s_->derived().alpha2;

  // (1/2delta) sum_x W_x sum_q w_q div_q(sigma q M) (h - a)
  TensorField sig = sigma_of_u(g, st.u_nodal, SigmaMode::General);
  const Vec& w = q.weights();
  Vec G(q.size());
  double term2 = 0;
  for (int v = 0; v < g.nvert(); ++v) {
    Sigma2 s{sig.a11[v], sig.a12[v], sig.a21[v], sig.a22[v]};
    if (std::abs(s.a11) + std::abs(s.a12) + std::abs(s.a21) + std::abs(s.a22) == 0.0)
      continue;
    q.apply_drift_inplace(s, q.m_node().data(), G.data());  // -div_q(sigma q M)
    double cell = 0;
    const double* h = st.f.h.col(v).data();
    for (int iq = 0; iq < q.size(); ++iq) cell += w[iq] * (-G[iq]) * (h[iq] - a);
    term2 += g.wx[v] * cell;
  }
  term2 /= two_delta;
  return term1 - term2;
}

DiagnosticsRecord DiagnosticsComputer::energy_ledger(const CoupledState& st,
                                                     const EnergyContext* ctx) const {
  DiagnosticsRecord r;
  r.t = st.t;
  const double usq = u_l2_sq(st);
  r.u_l2 = std::sqrt(usq);
  r.grad_u_l2 = std::sqrt(grad_u_sq(st));
  r.psi_l2m = std::sqrt(psi_l2m_sq(st));
  r.psi_hdot = std::sqrt(std::max(0.0, psi_hdot_sq(st)));
  r.picard_iters = st.last_picard_iters;
  if (ctx) {
    const double alpha4 = s_->derived().alpha4;
    r.energy_margin = (ctx->u0_sq + alpha4 * ctx->psi0_sq) - (usq + ctx->diss_sum);
  }
  return r;
}

}  // namespace fene
