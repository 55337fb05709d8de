#include <steklov/solvers.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <random>

namespace steklov {

LinearOperator matrix_operator(const Matrix& A) {
  return {A.rows(), [&A](const Vector& x, Vector& y) { y.noalias() = A * x; }};
}

LinearOperator sparse_operator(const SparseMatrix& A) {
  return {A.rows(), [&A](const Vector& x, Vector& y) { y.noalias() = A * x; }};
}

LinearOperator diagonal_operator(const Vector& diagonal) {
  return {diagonal.size(),
          [&diagonal](const Vector& x, Vector& y) { y = diagonal.cwiseProduct(x); }};
}

LinearOperator diagonal_inverse_operator(const Vector& diagonal) {
  return {diagonal.size(),
          [&diagonal](const Vector& x, Vector& y) { y = x.cwiseQuotient(diagonal); }};
}

LinearOperator identity_operator(Index n) {
  return {n, [](const Vector& x, Vector& y) { y = x; }};
}

PcgResult pcg(const LinearOperator& A, const LinearOperator& preconditioner_inv, const Vector& b,
              double tol, int max_iter, const Vector* x0) {
  const auto start = std::chrono::steady_clock::now();
  PcgResult result;
  const double bnorm = b.norm();
  if (bnorm == 0) {
    result.x = Vector::Zero(A.n);
    result.report.converged = true;
    return result;
  }
  Vector x = x0 ? *x0 : Vector::Zero(A.n);
  Vector r = b - A(x);
  Vector z = preconditioner_inv(r);
  Vector p = z;
  double rz = r.dot(z);
  result.preconditioned_residual_norms.push_back(std::sqrt(std::max(rz, 0.0)));
  Vector ap(A.n);
  int it = 0;
  for (; it < max_iter; ++it) {
    if (r.norm() / bnorm <= tol) break;
    A.apply(p, ap);
    const double pap = p.dot(ap);
    if (pap <= 0) throw BreakdownError("pcg: nonpositive curvature, operator not SPD");
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = preconditioner_inv(r);
    const double rz_next = r.dot(z);
    result.preconditioned_residual_norms.push_back(std::sqrt(std::max(rz_next, 0.0)));
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  result.x = std::move(x);
  result.report.iterations = it;
  result.report.residual = r.norm() / bnorm;
  result.report.converged = result.report.residual <= tol;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

// B-orthonormalizes the columns of X (eigenvalue-filtered Gram), dropping
// directions whose relative Gram eigenvalue falls below drop_tol. BX is
// recomputed; companion blocks (e.g. A*X) can be kept consistent through the
// returned mixing matrix: X_new = X_old * mix.
Index b_orthonormalize(Matrix& X, Matrix& BX, const LinearOperator& B, double drop_tol = 1e-12,
                       Matrix* mix_out = nullptr) {
  if (X.cols() == 0) {
    if (mix_out) mix_out->resize(0, 0);
    return 0;
  }
  BX.resize(X.rows(), X.cols());
  Vector tmp;
  for (Index c = 0; c < X.cols(); ++c) {
    B.apply(X.col(c), tmp);
    BX.col(c) = tmp;
  }
  Matrix gram = X.transpose() * BX;
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const double cutoff = std::max(eig.eigenvalues().maxCoeff(), 0.0) * drop_tol;
  Matrix mix(X.cols(), X.cols());
  Index kept = 0;
  for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] > cutoff && eig.eigenvalues()[i] > 0) {
      mix.col(kept++) = eig.eigenvectors().col(i) / std::sqrt(eig.eigenvalues()[i]);
    }
  }
  mix.conservativeResize(Eigen::NoChange, kept);
  X = (X * mix).eval();
  BX = (BX * mix).eval();
  if (mix_out) *mix_out = mix;
  return kept;
}

}  // namespace

LobpcgResult lobpcg(const LinearOperator& A, const LinearOperator& B,
                    const LinearOperator& preconditioner_inv, const LobpcgOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Index n = A.n;
  const Index k = options.k;
  if (k < 1) throw Error("lobpcg: k must be positive");
  Index m = options.block > 0 ? options.block : k + std::max<Index>(5, (k + 4) / 5);
  m = std::min(m, n);
  if (m < k) throw Error("lobpcg: block smaller than k");

  Matrix C, BC;
  if (options.constraints && options.constraints->cols() > 0) {
    C = *options.constraints;
    if (b_orthonormalize(C, BC, B) == 0) {
      throw IllConditionedBasis("lobpcg: degenerate constraints");
    }
  }
  auto project_constraints = [&](Matrix& Z) {
    if (C.cols() > 0) Z -= C * (BC.transpose() * Z);
  };

  Matrix X(n, m);
  {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss;
    Index given = 0;
    if (options.initial) {
      given = std::min<Index>(m, options.initial->cols());
      X.leftCols(given) = options.initial->leftCols(given);
    }
    for (Index c = given; c < m; ++c) {
      for (Index i = 0; i < n; ++i) X(i, c) = gauss(rng);
    }
  }
  project_constraints(X);
  Matrix BX;
  if (b_orthonormalize(X, BX, B) < m) {
    throw IllConditionedBasis("lobpcg: initial block degenerate");
  }

  auto apply_block = [&](const LinearOperator& op, const Matrix& Z) {
    Matrix out(n, Z.cols());
    Vector tmp;
    for (Index c = 0; c < Z.cols(); ++c) {
      op.apply(Z.col(c), tmp);
      out.col(c) = tmp;
    }
    return out;
  };

  Matrix AX = apply_block(A, X);
  Matrix P, AP, BP;

  LobpcgResult result;
  Vector ritz = Vector::Zero(m);
  Vector residuals = Vector::Ones(m);
  int it = 0;
  for (; it < options.max_iter; ++it) {
    {
      Matrix xax = X.transpose() * AX;
      xax = 0.5 * (xax + xax.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(xax);
      ritz = eig.eigenvalues();
      X = (X * eig.eigenvectors()).eval();
      AX = (AX * eig.eigenvectors()).eval();
      BX = (BX * eig.eigenvectors()).eval();
    }
    const Matrix R = AX - BX * ritz.asDiagonal();
    for (Index c = 0; c < m; ++c) {
      const double scale = BX.col(c).norm();
      residuals[c] = scale > 0 ? R.col(c).norm() / scale : R.col(c).norm();
    }
    if (options.track_ritz_history) result.ritz_history.push_back(ritz.head(k));
    bool done = true;
    for (Index c = 0; c < k; ++c) done &= residuals[c] <= options.tol;
    if (done) {
      ++it;
      break;
    }

    // Soft locking: only unconverged residuals extend the search space.
    std::vector<Index> active;
    for (Index c = 0; c < m; ++c) {
      if (residuals[c] > options.tol) active.push_back(c);
    }
    Matrix W(n, static_cast<Index>(active.size()));
    Vector tmp;
    for (std::size_t idx = 0; idx < active.size(); ++idx) {
      preconditioner_inv.apply(R.col(active[idx]), tmp);
      W.col(static_cast<Index>(idx)) = tmp;
    }
    project_constraints(W);
    W -= X * (BX.transpose() * W);
    Matrix BW;
    const Index kept_w = b_orthonormalize(W, BW, B);
    if (kept_w == 0) break;  // residuals numerically inside span(X)
    const Matrix AW = apply_block(A, W);

    Index kept_p = 0;
    if (P.cols() > 0) {
      Matrix coef = BX.transpose() * P;
      P -= X * coef;
      AP -= AX * coef;
      BP -= BX * coef;
      coef = BW.transpose() * P;
      P -= W * coef;
      AP -= AW * coef;
      BP -= BW * coef;
      if (C.cols() > 0) {
        // Constraint drift is second order; P stays B-orthogonal to C because
        // X and W are and P is built from them.
      }
      Matrix mix, BPn;
      kept_p = b_orthonormalize(P, BPn, B, 1e-10, &mix);
      if (kept_p > 0) {
        AP = (AP * mix).eval();
        BP = BPn;
      }
    }

    const Index dim = m + kept_w + kept_p;
    Matrix Z(n, dim), AZ(n, dim), BZ(n, dim);
    Z.leftCols(m) = X;
    AZ.leftCols(m) = AX;
    BZ.leftCols(m) = BX;
    Z.middleCols(m, kept_w) = W;
    AZ.middleCols(m, kept_w) = AW;
    BZ.middleCols(m, kept_w) = BW;
    if (kept_p > 0) {
      Z.rightCols(kept_p) = P;
      AZ.rightCols(kept_p) = AP;
      BZ.rightCols(kept_p) = BP;
    }

    Matrix gram_a = Z.transpose() * AZ;
    Matrix gram_b = Z.transpose() * BZ;
    gram_a = 0.5 * (gram_a + gram_a.transpose());
    gram_b = 0.5 * (gram_b + gram_b.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> bfac(gram_b);
    const double cutoff = bfac.eigenvalues().maxCoeff() * 1e-12;
    Matrix F(dim, dim);
    Index kept = 0;
    for (Index i = 0; i < dim; ++i) {
      if (bfac.eigenvalues()[i] > cutoff) {
        F.col(kept++) = bfac.eigenvectors().col(i) / std::sqrt(bfac.eigenvalues()[i]);
      }
    }
    if (kept < m) throw IllConditionedBasis("lobpcg: trial basis collapsed");
    F.conservativeResize(Eigen::NoChange, kept);
    Matrix reduced = F.transpose() * gram_a * F;
    reduced = 0.5 * (reduced + reduced.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
    const Matrix Y = F * eig.eigenvectors().leftCols(m);

    Matrix Yp = Y;
    Yp.topRows(m).setZero();
    P = Z * Yp;
    AP = AZ * Yp;
    BP = BZ * Yp;
    X = Z * Y;
    AX = AZ * Y;
    BX = BZ * Y;
    ritz = eig.eigenvalues().head(m);
  }

  result.eigenvalues = ritz.head(k);
  result.eigenvectors = X.leftCols(k);
  result.residuals = residuals.head(k);
  result.report.iterations = it;
  result.report.residual = residuals.head(k).maxCoeff();
  result.report.converged = result.report.residual <= options.tol;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double extremal_spd_pencil(const LinearOperator& A, const LinearOperator& preconditioner_inv,
                           Extremal which, double tol, int max_iter, std::uint64_t seed) {
  const Index n = A.n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = gauss(rng);
  z /= z.norm();

  // B := P^{-1} A is self-adjoint and positive in the A inner product. The
  // squared form E := A P^{-1} A is plain-symmetric, so the minimal eigenvalue
  // is reachable by inverse iteration with unpreconditioned CG on E.
  LinearOperator E{n, [&](const Vector& v, Vector& y) { y = A(preconditioner_inv(A(v))); }};

  // The Rayleigh value is the deliverable; extremal clusters make eigenvector
  // residuals meaningless, so stop once the value stays put.
  double rho = 0;
  int settled = 0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector az = A(z);
    const double zaz = z.dot(az);
    if (zaz <= 0) throw NoConvergence("extremal_spd_pencil: operator not positive on probe");
    const Vector bz = preconditioner_inv(az);
    const double rho_next = az.dot(bz) / zaz;
    settled = (it > 0 && std::abs(rho_next - rho) <= 0.3 * tol * std::abs(rho_next)) ? settled + 1 : 0;
    rho = rho_next;
    if (settled >= 3) return rho;
    if (which == Extremal::Max) {
      z = bz / bz.norm();
    } else {
      const PcgResult inner =
          pcg(E, identity_operator(n), az, std::min(0.1 * tol, 1e-6), 20 * static_cast<int>(n));
      z = inner.x / inner.x.norm();
    }
  }
  throw NoConvergence("extremal_spd_pencil: power iteration did not settle");
}

}  // namespace steklov
