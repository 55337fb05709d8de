#pragma once

#include <steklov/operators.hpp>
#include <steklov/solvers.hpp>

namespace steklov {

// Scale-invariant preconditioners of Eq.-17 type built on the lumped mass:
//   P_V^{-1} = 4 M_L^{-1} H M_L^{-1} + beta 1 1^T,  beta = (1^T M 1)^{-3/2}
//   P_S^{-1} = M_L^{-1} V M_L^{-1}
// The rank-one term stabilizes the hypersingular kernel on constants.
struct Preconditioners {
  LinearOperator v_inv;
  LinearOperator s_inv;
  double beta = 0;
};

// Holds references into `ops`; the OperatorSet must outlive the result.
Preconditioners make_preconditioners(const OperatorSet& ops);

struct DtnOptions {
  double inner_tol = 1e-10;  // relative PCG tolerance of the V-solve
  int inner_max_iter = 5000;
};

// Matrix-free symmetric weak-form Dirichlet-to-Neumann operator
//   S = H + Q^T V^{-1} Q,  Q = 0.5 M + K.
// Applying S performs one preconditioned CG solve with V; the auxiliary
// solution is the Neumann trace. Read-only after construction and safe for
// concurrent applies. Keeps a reference to the OperatorSet.
class DtnOperator {
 public:
  explicit DtnOperator(const OperatorSet& ops, DtnOptions options = {});

  Index size() const { return ops_->size(); }
  const OperatorSet& ops() const { return *ops_; }
  const Matrix& Q() const { return q_; }
  const Preconditioners& preconditioners() const { return precond_; }
  const DtnOptions& options() const { return options_; }
  void set_inner_tolerance(double tol) { options_.inner_tol = tol; }
  // True when the PDE semantics are the generalized (open-surface) ones.
  bool generalized() const { return !ops_->closed; }

  // S u; the Neumann trace t = V^{-1} Q u is written to *neumann if given.
  Vector apply(const Vector& u, Vector* neumann = nullptr) const;
  // M V^{-1} Q u: the strong-form (Calderon first row) route, used only as a
  // consistency cross-check against apply().
  Vector apply_nonsymmetric(const Vector& u) const;
  LinearOperator as_operator() const;

 private:
  const OperatorSet* ops_;
  DtnOptions options_;
  Matrix q_;
  Preconditioners precond_;
};

// gamma = 0.9 * sigma_min(P_V^{-1} V), sigma_min from the squared-form power
// iteration at relative tolerance `tol`.
double estimate_gamma(const OperatorSet& ops, const Preconditioners& precond, double tol = 1e-3);

// Saddle-point blocks of the expanded system with the Bramble-Pasciak
// transformation applied; bp_matrix() is symmetric positive semidefinite on
// [t; u] and bp_preconditioner() is the inverse action of
// P_A = diag(P_V / (alpha - 1), P_S).
struct SaddleSystem {
  const OperatorSet* ops = nullptr;
  const DtnOperator* dtn = nullptr;
  double gamma = 0;
  double alpha = 0;  // 1 / gamma

  LinearOperator bp_matrix() const;
  LinearOperator bp_preconditioner() const;
};

SaddleSystem make_saddle_system(const DtnOperator& op, double gamma = 0);

struct SaddleSolveOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  bool deflate_constants = true;
  double gamma = 0;  // 0: estimate
};

struct DtnSolveResult {
  Vector u;
  Vector t;  // Neumann trace
  SolveReport report;
};

// Solves S u = M f through the Bramble-Pasciak-transformed block system with
// CG and the diagonal block preconditioner. On closed meshes the system is
// solved in the complement of constants; a constant component in f raises
// RankDeficient unless deflation is on (then it is removed).
DtnSolveResult solve_dtn_linear(const DtnOperator& op, const Vector& f,
                                const SaddleSolveOptions& options = {});

struct EigsOptions {
  int k = 10;
  double tol = 1e-6;
  int max_iter = 100;
  std::uint64_t seed = 0;
  int block = 0;  // 0: k + max(5, ceil(k/5))
};

struct SteklovSpectrum {
  Vector eigenvalues;     // ascending
  Matrix eigenvectors;    // M-orthonormal columns u_i
  Matrix neumann_traces;  // t_i = V^{-1} Q u_i
  Vector residuals;       // ||S u - lambda M u|| / ||M u||
  SolveReport report;
  bool deflated_constant = false;
};

// k smallest eigenpairs of (S, M) by LOBPCG with the single-layer
// preconditioner, random initialization from the seed. On closed meshes the
// constant nullvector is deflated and emitted analytically. Inner V-solve
// tolerances follow the outer tolerance (1e-2x while iterating, 1e-3x for the
// final residual sweep).
SteklovSpectrum steklov_eigs(const DtnOperator& op, const EigsOptions& options = {});

// Representation-formula evaluation of the harmonic extension at interior
// points, from vertex samples of the trace g and its normal derivative g_n.
// Exterior points silently produce meaningless values.
Vector evaluate_interior(const TriangleMesh& mesh, const Vector& g, const Vector& g_n,
                         const Points& points, int degree = 6);

}  // namespace steklov
