#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <memory>

namespace fene {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Maxwellian weight M(q) = (1-|q|^2)^delta on the unit disk; rejects |q|>=1.
double maxwellian(double qx, double qy, double delta);

struct Sigma2 {
  // 2x2 matrix [[a11,a12],[a21,a22]]
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
  double trace() const { return a11 + a22; }
};

// Polar tensor grid on the unit disk: Gauss-Legendre radial nodes on (0,1)
// (exact for the Beta-integral moments at integer delta) x uniform angles.
// All nodes are strictly interior; the Maxwellian weight supplies the
// boundary degeneracy so no boundary condition is imposed on |q|=1.
//
// Node index: iq = j*n_theta + k  (j radial, k angular).
//
// Fields live in one of two representations:
//   f-rep: plain density values f(q_jk)
//   h-rep: ratio h = f/M (primary unknown of the solver)
class QGrid {
 public:
  QGrid(int n_r, int n_theta, double delta);

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  int size() const { return n_r_ * n_theta_; }
  double delta() const { return delta_; }
  double dtheta() const { return dtheta_; }

  const Vec& r() const { return r_; }
  const Vec& theta() const { return theta_; }
  const Vec& weights() const { return w_; }          // Lebesgue weights, sums to ~pi
  const Vec& m_radial() const { return m_radial_; }  // M(r_j)
  const Vec& m_node() const { return m_node_; }      // M at every node
  const Vec& mass_weights() const { return wm_; }    // w * M  (q_mass of f=hM is wm.h)
  const Vec& qx() const { return qx_; }
  const Vec& qy() const { return qy_; }

  // Dirichlet form of the Fokker-Planck operator on h-fields:
  //   E(h) = int_D M |grad_q h|^2 dq  ~  h' K h
  // symmetric positive semidefinite, kernel = constants.
  const SpMat& stiffness() const { return stiffness_; }

  // Quadratures ------------------------------------------------------------

  double integrate(const Vec& f) const { return w_.dot(f); }  // plain Lebesgue
  /// L^2_M inner product: quadrature of phi*psi/M (f-rep arguments).
  double weighted_l2_inner(const Vec& phi, const Vec& psi) const;
  /// ||M grad_q(phi/M)||_{L^2_M}, evaluated from the h-representation.
  double hdot_m_seminorm(const Vec& phi_f) const;
  double hdot_m_seminorm_sq_h(const Vec& h) const;

  double q_mass_f(const Vec& f) const { return w_.dot(f); }
  double q_mass_h(const Vec& h) const { return wm_.dot(h); }

  /// Kramers stress of a cell given in h-rep: {s11, s12, s22} with
  /// s_ab = int q_a q_b (1-|q|^2)^(delta-1) h M/M ... = quadrature weights . h
  std::array<double, 3> kramers_stress_h(const double* h) const;
  std::array<double, 3> kramers_stress_f(const Vec& f) const;

  // Drift ------------------------------------------------------------------

  /// -div_q(sigma q phi) in conservative (adjoint-divergence) form; f-rep in
  /// and out. Quadrature of the result is exactly zero. Rejects sigma with
  /// |trace| > 1e-12.
  Vec apply_drift(const Sigma2& sigma, const Vec& phi_f) const;

  // In-place variant writing into out (same size), used by the solver loop.
  void apply_drift_inplace(const Sigma2& sigma, const double* phi_f, double* out) const;

  // Spectral gap -----------------------------------------------------------

  /// Smallest eigenvalue of the stiffness/mass pencil restricted to fields
  /// with zero q-mass (exact Fourier-block reduction of the assembled 2D
  /// operator). This is the discrete spectral gap of -L/alpha3.
  double spectral_gap() const;
  /// Poincare constant C = 1/sqrt(spectral_gap()).
  double estimate_poincare_constant() const;

  // Derived h-rep helpers
  Vec h_to_f(const Vec& h) const { return h.cwiseProduct(m_node_); }
  Vec f_to_h(const Vec& f) const { return f.cwiseQuotient(m_node_); }

  // Radial FE element coefficients (exposed for the per-mode eigensolve)
  const Vec& radial_weights() const { return rho_; }

 private:
  void build_quadrature();
  void build_stiffness();
  void build_drift_ops();

  int n_r_, n_theta_;
  double delta_, dtheta_;
  Vec r_, rho_, theta_;
  Vec w_, m_radial_, m_node_, wm_, qx_, qy_;
  Vec stress_w_[3];  // weights for s11, s12, s22 against h
  SpMat stiffness_;
  // radial derivative matrix (n_r x n_r, centered/one-sided) and element data
  Eigen::MatrixXd dr_dense_;  // small dense band kept sparse below
  SpMat dr_, dt_;             // d/dr on radial index, d/dtheta periodic on angular index
  Vec elem_coef_;             // int over radial element of M(r) r dr
};

// Time-invariant implicit diffusion solver for the FP substep:
// (W + dt*alpha3*K) h+ = W h_rhs, W = diag(w*M). Factorized once, reused per
// cell and per step. Conserves wm.h exactly.
class FpDiffusionSolver {
 public:
  FpDiffusionSolver(const QGrid& grid, double alpha3, double dt);
  void solve_inplace(Vec& h) const;
  double dt() const { return dt_; }

 private:
  const QGrid* grid_;
  double dt_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

}  // namespace fene
