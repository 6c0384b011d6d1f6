#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace fene {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Rectangle (0,lx)x(0,ly), uniform vertex grid (nx+1)x(ny+1); homogeneous
// Dirichlet velocity. Vertex index iv = i*(ny+1) + j.
struct FlowGrid {
  int nx = 32, ny = 32;
  double lx = 1.0, ly = 1.0;
  double hx = 0, hy = 0;

  FlowGrid() { init(); }
  FlowGrid(int nx_, int ny_, double lx_, double ly_) : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    init();
  }
  void init();

  int nvx() const { return nx + 1; }
  int nvy() const { return ny + 1; }
  int nvert() const { return nvx() * nvy(); }
  int idx(int i, int j) const { return i * nvy() + j; }
  bool boundary(int i, int j) const { return i == 0 || j == 0 || i == nx || j == ny; }

  Vec wx;  // trapezoid vertex weights for the discrete L^2(Omega)
};

// Nodal velocity field (both components), zero on the boundary.
struct Field2 {
  Vec u, v;
  Field2() = default;
  explicit Field2(int n) : u(Vec::Zero(n)), v(Vec::Zero(n)) {}
};

// 2x2 matrix field stored componentwise per vertex.
struct TensorField {
  Vec a11, a12, a21, a22;
  explicit TensorField(int n)
      : a11(Vec::Zero(n)), a12(Vec::Zero(n)), a21(Vec::Zero(n)), a22(Vec::Zero(n)) {}
};

enum class SigmaMode { General, Corotational };

struct StokesBasis {
  Vec lambda;                 // ascending
  std::vector<Field2> modes;  // L^2-orthonormal, discretely divergence-free
  int n() const { return static_cast<int>(modes.size()); }
};

// Discrete Stokes machinery built from the stream-function representation:
// divergence-free nodal fields are exactly the discrete curls of stream
// functions vanishing on the boundary, so the Leray projection and the
// eigenproblem both live on the interior stream dofs.
class StokesOperator {
 public:
  explicit StokesOperator(const FlowGrid& grid);

  const FlowGrid& grid() const { return grid_; }

  // Velocity from interior stream dofs (centered curl, zero boundary).
  Field2 curl(const Vec& phi) const;

  /// Orthogonal Leray projection of an arbitrary nodal field onto the
  /// discretely divergence-free subspace.
  Field2 project(const Field2& w) const;

  /// A w = P(-Lap_h w); exact on basis modes up to eigensolver tolerance.
  Field2 apply_stokes(const Field2& w) const;

  /// First n eigenpairs of the Stokes pencil; deterministic dense solve.
  StokesBasis eigenbasis(int n) const;

  double l2_inner(const Field2& a, const Field2& b) const;
  double l2_norm(const Field2& a) const;
  /// Max |centered divergence| over interior vertices.
  double max_divergence(const Field2& a) const;

  int n_stream() const { return ns_; }
  /// Dimension of the divergence-free velocity space (stream dofs minus the
  /// checkerboard kernel of the centered curl).
  int n_free() const { return nfree_; }

 private:
  Field2 laplacian(const Field2& w) const;  // 5-point, Dirichlet

  FlowGrid grid_;
  int ns_;                      // interior stream dofs: (nx-1)*(ny-1)
  int nfree_ = 0;
  SpMat cu_, cv_;               // stream -> nodal velocity components
  SpMat gram_, kform_;          // velocity L^2 Gram and H^1 form on stream dofs
  // G^+ = binv binv^t: the centered curl has a checkerboard kernel, so the
  // Gram matrix is only positive semidefinite and solves go through its
  // spectral pseudoinverse (kernel components never reach the velocity).
  Eigen::MatrixXd binv_;        // ns x nfree, = Q_keep diag(1/sqrt(ev))
};

// Velocity-field calculus ----------------------------------------------------

/// Centered (u.grad)u at interior vertices, zero on the boundary.
Field2 advection_term(const FlowGrid& g, const Field2& u);

/// Per-vertex sigma(u): general = grad u with any one-sided-difference trace
/// residue removed (interior centered trace is the discrete divergence, zero
/// by construction); corotational = grad u - (grad u)^t, exactly skew.
TensorField sigma_of_u(const FlowGrid& g, const Field2& u, SigmaMode mode);

/// Discrete H^1 seminorm squared via compact edge differences (matches the
/// eigenvalue normalization: ||grad v_i||^2 = lambda_i).
double grad_norm_sq(const FlowGrid& g, const Field2& u);

// Coefficient-space helpers
Vec project_Pn(const StokesOperator& op, const StokesBasis& basis, const Field2& w);
Field2 reconstruct(const StokesBasis& basis, const Vec& coef);
void viscous_semigroup_step(Vec& coef, const StokesBasis& basis, double alpha1, double dt);

// Eigenbasis disk cache (binary, keyed by grid/mode-count hash).
std::string basis_cache_key(const FlowGrid& g, int n);
bool load_basis_cache(const std::string& dir, const FlowGrid& g, int n, StokesBasis& out);
void save_basis_cache(const std::string& dir, const FlowGrid& g, int n,
                      const StokesBasis& basis);

}  // namespace fene
