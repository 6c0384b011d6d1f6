#include "fene/qgrid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fene/kernels.hpp"

namespace fene {

namespace {
constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes/weights on (0,1) by Golub-Welsch.
void gauss_legendre01(int n, Vec& nodes, Vec& weights) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // 2*v0^2 on (-1,1), halved by the affine map
  }
}
}  // namespace

double maxwellian(double qx, double qy, double delta) {
  const double r2 = qx * qx + qy * qy;
  if (r2 >= 1.0) throw std::domain_error("maxwellian: |q| must be < 1");
  return std::pow(1.0 - r2, delta);
}

QGrid::QGrid(int n_r, int n_theta, double delta)
    : n_r_(n_r), n_theta_(n_theta), delta_(delta) {
  if (n_r < 4 || n_theta < 4) throw std::invalid_argument("QGrid: grid too small");
  if (!(delta > 0.0)) throw std::invalid_argument("QGrid: delta must be > 0");
  dtheta_ = 2.0 * kPi / n_theta_;
  build_quadrature();
  build_stiffness();
  build_drift_ops();
}

void QGrid::build_quadrature() {
  Vec gl_w;
  gauss_legendre01(n_r_, r_, gl_w);
  rho_ = gl_w.cwiseProduct(r_);  // int phi(r) r dr ~ rho . phi

  theta_.resize(n_theta_);
  for (int k = 0; k < n_theta_; ++k) theta_[k] = k * dtheta_;

  const int n = size();
  w_.resize(n);
  m_radial_.resize(n_r_);
  m_node_.resize(n);
  wm_.resize(n);
  qx_.resize(n);
  qy_.resize(n);
  for (int c = 0; c < 3; ++c) stress_w_[c].resize(n);

  for (int j = 0; j < n_r_; ++j) {
    const double r = r_[j];
    const double one_m_r2 = 1.0 - r * r;
    m_radial_[j] = std::pow(one_m_r2, delta_);
    const double stress_rad = std::pow(one_m_r2, delta_ - 1.0);
    for (int k = 0; k < n_theta_; ++k) {
      const int iq = j * n_theta_ + k;
      const double c = std::cos(theta_[k]), s = std::sin(theta_[k]);
      w_[iq] = rho_[j] * dtheta_;
      m_node_[iq] = m_radial_[j];
      wm_[iq] = w_[iq] * m_radial_[j];
      qx_[iq] = r * c;
      qy_[iq] = r * s;
      stress_w_[0][iq] = w_[iq] * qx_[iq] * qx_[iq] * stress_rad;
      stress_w_[1][iq] = w_[iq] * qx_[iq] * qy_[iq] * stress_rad;
      stress_w_[2][iq] = w_[iq] * qy_[iq] * qy_[iq] * stress_rad;
    }
  }
}

void QGrid::build_stiffness() {
  // E(h) = sum_k dtheta sum_e c_e ((h_{j+1,k}-h_{j,k})/dr_e)^2
  //      + sum_j (rho_j M_j / r_j^2) sum_k (h_{j,k+1}-h_{j,k})^2 / dtheta
  // with c_e = int over element of M(r) r dr (closed form).
  elem_coef_.resize(n_r_ - 1);
  for (int j = 0; j + 1 < n_r_; ++j) {
    const double a = 1.0 - r_[j] * r_[j];
    const double b = 1.0 - r_[j + 1] * r_[j + 1];
    elem_coef_[j] =
        (std::pow(a, delta_ + 1.0) - std::pow(b, delta_ + 1.0)) / (2.0 * (delta_ + 1.0));
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(size()) * 8);
  for (int j = 0; j + 1 < n_r_; ++j) {
    const double dr = r_[j + 1] - r_[j];
    const double c = elem_coef_[j] * dtheta_ / (dr * dr);
    for (int k = 0; k < n_theta_; ++k) {
      const int a = j * n_theta_ + k, b = (j + 1) * n_theta_ + k;
      trip.emplace_back(a, a, c);
      trip.emplace_back(b, b, c);
      trip.emplace_back(a, b, -c);
      trip.emplace_back(b, a, -c);
    }
  }
  for (int j = 0; j < n_r_; ++j) {
    const double c = rho_[j] * m_radial_[j] / (r_[j] * r_[j] * dtheta_);
    for (int k = 0; k < n_theta_; ++k) {
      const int a = j * n_theta_ + k, b = j * n_theta_ + (k + 1) % n_theta_;
      trip.emplace_back(a, a, c);
      trip.emplace_back(b, b, c);
      trip.emplace_back(a, b, -c);
      trip.emplace_back(b, a, -c);
    }
  }
  stiffness_.resize(size(), size());
  stiffness_.setFromTriplets(trip.begin(), trip.end());
}

void QGrid::build_drift_ops() {
  // Second-order first-derivative matrices: d/dr on the nonuniform radial
  // nodes (3-point, one-sided at the ends) and centered periodic d/dtheta.
  // Both annihilate constants, which makes the adjoint-divergence form
  // exactly mass-free.
  std::vector<Eigen::Triplet<double>> tr;
  for (int j = 0; j < n_r_; ++j) {
    if (j == 0 || j == n_r_ - 1) {
      const int s = (j == 0) ? 1 : -1;
      const int j0 = j, j1 = j + s, j2 = j + 2 * s;
      const double h1 = r_[j1] - r_[j0], h2 = r_[j2] - r_[j0];
      // one-sided 3-point: exact for quadratics
      const double c0 = -(h1 + h2) / (h1 * h2);
      const double c1 = h2 / (h1 * (h2 - h1));
      const double c2 = -h1 / (h2 * (h2 - h1));
      tr.emplace_back(j, j0, c0);
      tr.emplace_back(j, j1, c1);
      tr.emplace_back(j, j2, c2);
    } else {
      const double hm = r_[j] - r_[j - 1], hp = r_[j + 1] - r_[j];
      tr.emplace_back(j, j - 1, -hp / (hm * (hm + hp)));
      tr.emplace_back(j, j, (hp - hm) / (hm * hp));
      tr.emplace_back(j, j + 1, hm / (hp * (hm + hp)));
    }
  }
  dr_.resize(n_r_, n_r_);
  dr_.setFromTriplets(tr.begin(), tr.end());

  tr.clear();
  const double c = 1.0 / (2.0 * dtheta_);
  for (int k = 0; k < n_theta_; ++k) {
    tr.emplace_back(k, (k + 1) % n_theta_, c);
    tr.emplace_back(k, (k - 1 + n_theta_) % n_theta_, -c);
  }
  dt_.resize(n_theta_, n_theta_);
  dt_.setFromTriplets(tr.begin(), tr.end());
}

double QGrid::weighted_l2_inner(const Vec& phi, const Vec& psi) const {
  if (phi.size() != size() || psi.size() != size())
    throw std::invalid_argument("weighted_l2_inner: field size does not match grid");
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += w_[i] * phi[i] * psi[i] / m_node_[i];
  return s;
}

double QGrid::hdot_m_seminorm_sq_h(const Vec& h) const {
  return h.dot(stiffness_ * h);
}

double QGrid::hdot_m_seminorm(const Vec& phi_f) const {
  if (phi_f.size() != size())
    throw std::invalid_argument("hdot_m_seminorm: field size does not match grid");
  const Vec h = f_to_h(phi_f);
  if (!h.allFinite()) throw std::domain_error("hdot_m_seminorm: non-finite h = phi/M");
  return std::sqrt(std::max(0.0, hdot_m_seminorm_sq_h(h)));
}

std::array<double, 3> QGrid::kramers_stress_h(const double* h) const {
  if (!(delta_ > 1.0))
    throw std::domain_error("kramers_stress: requires delta > 1");
  std::array<double, 3> s;
  kernels::reduce3(stress_w_[0].data(), stress_w_[1].data(), stress_w_[2].data(), h,
                   static_cast<std::size_t>(size()), s.data());
  return s;
}

std::array<double, 3> QGrid::kramers_stress_f(const Vec& f) const {
  const Vec h = f_to_h(f);
  return kramers_stress_h(h.data());
}

Vec QGrid::apply_drift(const Sigma2& sigma, const Vec& phi_f) const {
  if (phi_f.size() != size())
    throw std::invalid_argument("apply_drift: field size does not match grid");
  Vec out(size());
  apply_drift_inplace(sigma, phi_f.data(), out.data());
  return out;
}

void QGrid::apply_drift_inplace(const Sigma2& sigma, const double* phi,
                                double* out) const {
  const double scale = std::abs(sigma.a11) + std::abs(sigma.a12) +
                       std::abs(sigma.a21) + std::abs(sigma.a22);
  if (std::abs(sigma.trace()) > 1e-12 * std::max(1.0, scale))
    throw std::invalid_argument("apply_drift: sigma must be trace-free");

  // Flux of the drift velocity v = sigma q in polar components:
  //   v.rhat = r * (rhat' sigma rhat),  v.thetahat = r * (thetahat' sigma rhat)
  // drift = -div(v phi) = (1/w) [Dr' (w Fr) + Dt' (w Ftheta / r)].
  thread_local std::vector<double> coefR, coefT, X, Y;
  coefR.assign(n_theta_, 0.0);
  coefT.assign(n_theta_, 0.0);
  for (int k = 0; k < n_theta_; ++k) {
    const double c = std::cos(theta_[k]), s = std::sin(theta_[k]);
    coefR[k] = sigma.a11 * c * c + (sigma.a12 + sigma.a21) * c * s + sigma.a22 * s * s;
    coefT[k] = sigma.a21 * c * c - sigma.a12 * s * s + (sigma.a22 - sigma.a11) * c * s;
  }
  const int n = size();
  X.assign(n, 0.0);
  Y.assign(n, 0.0);
  for (int j = 0; j < n_r_; ++j) {
    const double wr = rho_[j] * dtheta_ * r_[j];   // w * r
    const double wt = rho_[j] * dtheta_;           // w * r / r
    const double* p = phi + j * n_theta_;
    double* x = X.data() + j * n_theta_;
    double* y = Y.data() + j * n_theta_;
    for (int k = 0; k < n_theta_; ++k) {
      x[k] = wr * coefR[k] * p[k];
      y[k] = wt * coefT[k] * p[k];
    }
  }

  std::fill(out, out + n, 0.0);
  // Dr' X, accumulated column-wise over the radial stencil
  for (int jr = 0; jr < dr_.outerSize(); ++jr) {
    for (SpMat::InnerIterator it(dr_, jr); it; ++it) {
      // dr_ is row-major conceptually but stored col-major; it.row() is the
      // derivative row, it.col()==jr the source node. Transpose: out row = col.
      const double* x = X.data() + it.row() * n_theta_;
      double* o = out + it.col() * n_theta_;
      const double v = it.value();
      for (int k = 0; k < n_theta_; ++k) o[k] += v * x[k];
    }
  }
  // Dt' Y = -Dt Y (centered periodic difference is antisymmetric)
  const double cth = 1.0 / (2.0 * dtheta_);
  for (int j = 0; j < n_r_; ++j) {
    const double* y = Y.data() + j * n_theta_;
    double* o = out + j * n_theta_;
    for (int k = 0; k < n_theta_; ++k) {
      const int kp = (k + 1) % n_theta_, km = (k - 1 + n_theta_) % n_theta_;
      o[k] += -(y[kp] - y[km]) * cth;
    }
  }
  for (int j = 0; j < n_r_; ++j) {
    const double inv_w = 1.0 / (rho_[j] * dtheta_);
    double* o = out + j * n_theta_;
    for (int k = 0; k < n_theta_; ++k) o[k] *= inv_w;
  }
}

double QGrid::spectral_gap() const {
  // The assembled 2D pencil (K, diag(w M)) block-diagonalizes exactly under
  // the DFT in theta; per angular mode m the radial pencil is
  //   (Kr + mu_m S) h = lambda Wr h,  mu_m = (2 - 2cos(m dtheta))/dtheta^2.
  // Zero-q-mass constraint only touches the m=0 block, where the second
  // eigenvalue applies.
  Eigen::MatrixXd kr = Eigen::MatrixXd::Zero(n_r_, n_r_);
  for (int j = 0; j + 1 < n_r_; ++j) {
    const double dr = r_[j + 1] - r_[j];
    const double c = elem_coef_[j] / (dr * dr);
    kr(j, j) += c;
    kr(j + 1, j + 1) += c;
    kr(j, j + 1) -= c;
    kr(j + 1, j) -= c;
  }
  Vec wr(n_r_), s(n_r_);
  for (int j = 0; j < n_r_; ++j) {
    wr[j] = rho_[j] * m_radial_[j];
    s[j] = wr[j] / (r_[j] * r_[j]);
  }
  const Eigen::MatrixXd wmat = wr.asDiagonal();

  double gap = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= n_theta_ / 2; ++m) {
    const double mu = (2.0 - 2.0 * std::cos(m * dtheta_)) / (dtheta_ * dtheta_);
    Eigen::MatrixXd a = kr;
    a.diagonal() += mu * s;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, wmat,
                                                                 Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("spectral_gap: radial eigensolve failed");
    const double lam = (m == 0) ? es.eigenvalues()[1] : es.eigenvalues()[0];
    gap = std::min(gap, lam);
    if (m >= 2 && es.eigenvalues()[0] > 4.0 * gap) break;  // mu_m is increasing
  }
  if (!(gap > 0.0) || !std::isfinite(gap))
    throw std::runtime_error("spectral_gap: nonpositive gap");
  return gap;
}

double QGrid::estimate_poincare_constant() const {
  return 1.0 / std::sqrt(spectral_gap());
}

FpDiffusionSolver::FpDiffusionSolver(const QGrid& grid, double alpha3, double dt)
    : grid_(&grid), dt_(dt) {
  SpMat a = dt * alpha3 * grid.stiffness();
  for (int i = 0; i < grid.size(); ++i) a.coeffRef(i, i) += grid.mass_weights()[i];
  a.makeCompressed();
  ldlt_.compute(a);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("FpDiffusionSolver: factorization failed");
}

void FpDiffusionSolver::solve_inplace(Vec& h) const {
  const Vec rhs = grid_->mass_weights().cwiseProduct(h);
  h = ldlt_.solve(rhs);
}

}  // namespace fene
