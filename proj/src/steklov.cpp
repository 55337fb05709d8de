#include <steklov/steklov.hpp>

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <memory>

namespace steklov {

namespace {

constexpr double kPi = 3.14159265358979323846;

}

Preconditioners make_preconditioners(const OperatorSet& ops) {
  Preconditioners p;
  const double total_mass = ops.M_lumped.sum();  // 1^T M 1 = surface area
  p.beta = 1.0 / std::pow(total_mass, 1.5);
  const double beta = p.beta;
  // The hypersingular sandwich needs the consistent mass on both sides; the
  // lumped inverse is off by up to 4x on mesh-frequency modes, which ruins the
  // O(1) conditioning of P_V^{-1} V. M is sparse and well conditioned, so one
  // Cholesky factorization covers all applications.
  auto mass_solver = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(ops.M);
  if (mass_solver->info() != Eigen::Success) {
    throw Error("make_preconditioners: mass matrix not factorizable");
  }
  p.v_inv = {ops.size(), [&ops, beta, mass_solver](const Vector& x, Vector& y) {
               const Vector mx = mass_solver->solve(x);
               y = 4.0 * mass_solver->solve(ops.H * mx);
               y.array() += beta * x.sum();
             }};
  p.s_inv = {ops.size(), [&ops](const Vector& x, Vector& y) {
               const Vector mx = x.cwiseQuotient(ops.M_lumped);
               y.noalias() = (ops.V * mx).cwiseQuotient(ops.M_lumped);
             }};
  return p;
}

DtnOperator::DtnOperator(const OperatorSet& ops, DtnOptions options)
    : ops_(&ops), options_(options), q_(0.5 * Matrix(ops.M) + ops.K),
      precond_(make_preconditioners(ops)) {}

Vector DtnOperator::apply(const Vector& u, Vector* neumann) const {
  Vector rhs = q_ * u;
  PcgResult inner = pcg(matrix_operator(ops_->V), precond_.v_inv, rhs, options_.inner_tol,
                        options_.inner_max_iter);
  if (!inner.report.converged) {
    throw InnerSolveDiverged("V-solve stalled at relative residual " +
                             std::to_string(inner.report.residual));
  }
  if (neumann) *neumann = inner.x;
  return ops_->H * u + q_.transpose() * inner.x;
}

Vector DtnOperator::apply_nonsymmetric(const Vector& u) const {
  Vector rhs = q_ * u;
  PcgResult inner = pcg(matrix_operator(ops_->V), precond_.v_inv, rhs, options_.inner_tol,
                        options_.inner_max_iter);
  if (!inner.report.converged) {
    throw InnerSolveDiverged("V-solve stalled at relative residual " +
                             std::to_string(inner.report.residual));
  }
  return ops_->M * inner.x;
}

LinearOperator DtnOperator::as_operator() const {
  return {size(), [this](const Vector& x, Vector& y) { y = apply(x); }};
}

double estimate_gamma(const OperatorSet& ops, const Preconditioners& precond, double tol) {
  return 0.9 * extremal_spd_pencil(matrix_operator(ops.V), precond.v_inv, Extremal::Min, tol);
}

LinearOperator SaddleSystem::bp_matrix() const {
  const Index n = ops->size();
  const double a = alpha;
  return {2 * n, [this, n, a](const Vector& x, Vector& y) {
            const auto t = x.head(n);
            const auto u = x.tail(n);
            const Matrix& q = dtn->Q();
            const Vector d = ops->V * t - q * u;  // first-row saddle residual
            const Vector pd = dtn->preconditioners().v_inv(d);
            y.resize(2 * n);
            y.head(n) = a * (ops->V * pd) - d;
            y.tail(n) = q.transpose() * (t - a * pd) + ops->H * u;
          }};
}

LinearOperator SaddleSystem::bp_preconditioner() const {
  const Index n = ops->size();
  const double scale = alpha - 1.0;
  return {2 * n, [this, n, scale](const Vector& x, Vector& y) {
            y.resize(2 * n);
            y.head(n) = scale * dtn->preconditioners().v_inv(x.head(n));
            y.tail(n) = dtn->preconditioners().s_inv(x.tail(n));
          }};
}

SaddleSystem make_saddle_system(const DtnOperator& op, double gamma) {
  SaddleSystem sys;
  sys.ops = &op.ops();
  sys.dtn = &op;
  sys.gamma = gamma > 0 ? gamma : estimate_gamma(op.ops(), op.preconditioners());
  sys.alpha = 1.0 / sys.gamma;
  return sys;
}

DtnSolveResult solve_dtn_linear(const DtnOperator& op, const Vector& f,
                                const SaddleSolveOptions& options) {
  const Index n = op.size();
  const OperatorSet& ops = op.ops();
  Vector mf = ops.M * f;

  // Constants span the kernel on closed meshes; the system is solved in their
  // complement.
  Vector m_one;
  double mass = 0;
  if (ops.closed) {
    m_one = ops.M * Vector::Ones(n);
    mass = m_one.sum();
    const double mean = mf.sum() / mass;
    if (std::abs(mean) > 1e-12 * (mf.norm() / std::sqrt(static_cast<double>(n)) + 1e-300) &&
        !options.deflate_constants) {
      throw RankDeficient("solve_dtn_linear: f has a constant component and deflation is off");
    }
    mf -= mean * m_one;
  }

  SaddleSystem sys = make_saddle_system(op, options.gamma);
  const LinearOperator A = sys.bp_matrix();
  const LinearOperator P = sys.bp_preconditioner();

  // Project the u-block against constants inside the operator so CG cannot
  // drift along the kernel.
  LinearOperator A_projected = A;
  if (ops.closed) {
    A_projected = {2 * n, [&, n](const Vector& x, Vector& y) {
                     Vector xp = x;
                     auto u = xp.tail(n);
                     u -= Vector::Ones(n) * (m_one.dot(u) / mass);
                     A.apply(xp, y);
                     auto yu = y.tail(n);
                     yu -= m_one * (yu.sum() / mass);
                   }};
  }

  Vector rhs = Vector::Zero(2 * n);
  rhs.tail(n) = mf;
  PcgResult cg = pcg(A_projected, P, rhs, options.tol, options.max_iter);
  if (!cg.report.converged) {
    throw SolveDiverged("solve_dtn_linear: residual " + std::to_string(cg.report.residual));
  }
  DtnSolveResult result;
  result.t = cg.x.head(n);
  result.u = cg.x.tail(n);
  if (ops.closed) {
    result.u -= Vector::Ones(n) * (m_one.dot(result.u) / mass);
  }
  result.report = cg.report;
  return result;
}

SteklovSpectrum steklov_eigs(const DtnOperator& op, const EigsOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Index n = op.size();
  const OperatorSet& ops = op.ops();
  if (options.k >= n / 2) throw Error("steklov_eigs: k must be below n/2");

  const bool deflate = ops.closed;
  const int k_solver = deflate ? options.k - 1 : options.k;

  SteklovSpectrum spectrum;
  spectrum.deflated_constant = deflate;

  // Nested tolerances: the V-solve runs two digits tighter than the outer
  // eigensolver, then one more for the final residual sweep.
  DtnOperator iterate(op.ops(), op.options());
  iterate.set_inner_tolerance(std::min(1e-2 * options.tol, 1e-6));
  DtnOperator polish(op.ops(), op.options());
  polish.set_inner_tolerance(std::min(1e-3 * options.tol, 1e-8));

  const LinearOperator B = sparse_operator(ops.M);

  Matrix constraints;
  if (deflate) {
    constraints = Matrix::Ones(n, 1);
  }

  LobpcgResult eig;
  if (k_solver > 0) {
    LobpcgOptions lo;
    lo.k = k_solver;
    lo.tol = options.tol;
    lo.max_iter = options.max_iter;
    lo.seed = options.seed;
    lo.block = options.block;
    if (deflate) lo.constraints = &constraints;
    eig = lobpcg(iterate.as_operator(), B, op.preconditioners().s_inv, lo);
  } else {
    eig.eigenvalues.resize(0);
    eig.eigenvectors.resize(n, 0);
    eig.residuals.resize(0);
    eig.report.converged = true;
  }

  const Index k_total = options.k;
  spectrum.eigenvalues.resize(k_total);
  spectrum.eigenvectors.resize(n, k_total);
  spectrum.neumann_traces.resize(n, k_total);
  spectrum.residuals.resize(k_total);

  Index out = 0;
  if (deflate) {
    const double mass = Vector::Ones(n).dot(ops.M * Vector::Ones(n));
    spectrum.eigenvalues[0] = 0.0;
    spectrum.eigenvectors.col(0) = Vector::Ones(n) / std::sqrt(mass);
    out = 1;
  }
  for (Index i = 0; i < k_solver; ++i, ++out) {
    spectrum.eigenvalues[out] = eig.eigenvalues[i];
    spectrum.eigenvectors.col(out) = eig.eigenvectors.col(i);
  }

  // Final sweep: tight Neumann traces and trustworthy residual norms.
  for (Index i = 0; i < k_total; ++i) {
    Vector t;
    const Vector su = polish.apply(spectrum.eigenvectors.col(i), &t);
    const Vector mu = ops.M * spectrum.eigenvectors.col(i);
    spectrum.neumann_traces.col(i) = t;
    spectrum.residuals[i] = (su - spectrum.eigenvalues[i] * mu).norm() / mu.norm();
  }

  spectrum.report = eig.report;
  spectrum.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (k_solver > 0) {
    spectrum.report.residual = spectrum.residuals.maxCoeff();
  }
  return spectrum;
}

Vector evaluate_interior(const TriangleMesh& mesh, const Vector& g, const Vector& g_n,
                         const Points& points, int degree) {
  const TriangleRule& rule = triangle_rule(degree);
  Vector values = Vector::Zero(points.rows());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    const Vec3 normal = mesh.normal(t);
    const double area = mesh.areas[t];
    const int i0 = mesh.triangles(t, 0), i1 = mesh.triangles(t, 1), i2 = mesh.triangles(t, 2);
    for (Index q = 0; q < rule.weights.size(); ++q) {
      const double l0 = rule.nodes(q, 0), l1 = rule.nodes(q, 1), l2 = rule.nodes(q, 2);
      const Vec3 y = l0 * a + l1 * b + l2 * c;
      const double gy = l0 * g[i0] + l1 * g[i1] + l2 * g[i2];
      const double gny = l0 * g_n[i0] + l1 * g_n[i1] + l2 * g_n[i2];
      const double w = rule.weights[q] * area / (4 * kPi);
      for (Index p = 0; p < points.rows(); ++p) {
        const Vec3 x = points.row(p).transpose();
        const Vec3 d = x - y;
        const double r = d.norm();
        values[p] += w * (gny / r - d.dot(normal) / (r * r * r) * gy);
      }
    }
  }
  return values;
}

}  // namespace steklov
