#pragma once

#include <steklov/types.hpp>

#include <functional>
#include <vector>

namespace steklov {

// Matrix-free symmetric operator: dimension plus an apply action.
struct LinearOperator {
  Index n = 0;
  std::function<void(const Vector&, Vector&)> apply_fn;

  Vector operator()(const Vector& x) const {
    Vector y;
    apply(x, y);
    return y;
  }
  void apply(const Vector& x, Vector& y) const {
    y.resize(n);
    apply_fn(x, y);
  }
};

// The returned operators keep references; the wrapped object must outlive them.
LinearOperator matrix_operator(const Matrix& A);
LinearOperator sparse_operator(const SparseMatrix& A);
LinearOperator diagonal_operator(const Vector& diagonal);
LinearOperator diagonal_inverse_operator(const Vector& diagonal);
LinearOperator identity_operator(Index n);

struct SolveReport {
  int iterations = 0;
  double residual = 0;  // relative, definition depends on the solver
  bool converged = false;
  double seconds = 0;
};

struct PcgResult {
  Vector x;
  SolveReport report;
  std::vector<double> preconditioned_residual_norms;  // sqrt(r' P^{-1} r) per iteration
};

// Preconditioned conjugate gradient for SPD A; stops at ||Ax-b||/||b|| <= tol.
// Throws BreakdownError on nonpositive curvature.
PcgResult pcg(const LinearOperator& A, const LinearOperator& preconditioner_inv, const Vector& b,
              double tol, int max_iter, const Vector* x0 = nullptr);

struct LobpcgOptions {
  int k = 1;
  double tol = 1e-8;  // relative: ||A x - lambda B x|| <= tol * ||B x||
  int max_iter = 200;
  std::uint64_t seed = 0;
  int block = 0;                        // 0: k + max(5, ceil(k/5)) guard vectors
  const Matrix* constraints = nullptr;  // directions to deflate (need not be orthonormal)
  const Matrix* initial = nullptr;      // optional initial block, overrides seed
  bool track_ritz_history = false;
};

struct LobpcgResult {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors; // B-orthonormal columns
  Vector residuals;    // relative, per returned pair
  SolveReport report;
  std::vector<Vector> ritz_history;
};

// Locally optimal block PCG for the k smallest eigenpairs of (A, B), with
// Rayleigh-Ritz over {X, P^{-1}R, X_prev}. B must be positive definite on the
// working subspace. Converged vectors are soft-locked; near-dependent basis
// directions are dropped before each Rayleigh-Ritz solve.
LobpcgResult lobpcg(const LinearOperator& A, const LinearOperator& B,
                    const LinearOperator& preconditioner_inv, const LobpcgOptions& options);

enum class Extremal { Min, Max };

// Extremal eigenvalue of P^{-1} A for an SPD pair, via (inverse) power
// iteration on the squared form A P^{-1} A against A; no preconditioner is
// needed for the inner conjugate-gradient solves.
double extremal_spd_pencil(const LinearOperator& A, const LinearOperator& preconditioner_inv,
                           Extremal which, double tol = 1e-3, int max_iter = 500,
                           std::uint64_t seed = 7);

}  // namespace steklov
