#pragma once

#include <steklov/mesh.hpp>
#include <steklov/quadrature.hpp>
#include <steklov/types.hpp>

#include <string>

namespace steklov {

// Pointwise kernels of the four boundary integral operators. The 1/4pi
// fundamental-solution prefactor is applied by the quadrature layer.
enum class KernelKind { SingleLayer, DoubleLayer, AdjointDoubleLayer, Hypersingular };

// v = 1/r, k = (x-y).n(y)/r^3, t = (y-x).n(x)/r^3, h = -n(x).n(y)/r^3 - 3[(x-y).n(y)][(y-x).n(x)]/r^5,
// with r = |x-y| + epsilon. Throws CoincidentPoints when x == y.
double kernel_eval(KernelKind kind, const Vec3& x, const Vec3& y, const Vec3& nx, const Vec3& ny,
                   double epsilon = 0.0);

RegularizedKernel named_kernel(KernelKind kind, double epsilon = 0.0);

// Distance-graded quadrature: well-separated pairs use a fixed symmetric
// rule, moderately close pairs a higher-degree rule, almost-touching pairs a
// collapsed tensor rule, and touching pairs the singularity-removing
// transforms.
struct QuadratureOptions {
  int regular_degree = 4;    // symmetric rule degree for well-separated pairs
  int near_degree = 8;       // rule degree below near_ratio * panel size
  double near_ratio = 3.0;
  int close_points = 10;     // collapsed rule points below close_ratio * size
  double close_ratio = 1.3;
  int singular_points = 8;   // Gauss points per dimension for touching pairs
  double epsilon = 0.0;      // kernel regularization length
};

struct AssemblyOptions {
  QuadratureOptions quadrature;
  int threads = 0;  // 0: honor THREADS env var, else hardware concurrency
};

// Dense Galerkin matrices of the boundary operators for one mesh, plus the
// mass matrix. T is the exact transpose of K and is exposed as a view.
struct OperatorSet {
  Matrix V;          // single layer, symmetric positive definite
  Matrix K;          // double layer
  Matrix H;          // hypersingular, symmetric positive semidefinite
  SparseMatrix M;    // full Galerkin mass
  Vector M_lumped;   // row sums of M
  bool closed = false;
  double epsilon = 0.0;

  Index size() const { return V.rows(); }
  auto T() const { return K.transpose(); }
};

// Assembles V, K, H, M over all panel pairs. H uses the surface-curl
// integration-by-parts identity, so only the single-layer kernel is ever
// integrated for it. Deterministic for any thread count.
OperatorSet assemble(const TriangleMesh& mesh, const AssemblyOptions& options = {});

SparseMatrix galerkin_mass(const TriangleMesh& mesh);
Vector lumped_mass(const TriangleMesh& mesh);

// Little-endian binary dump: u64 n, then V, K, H, M (dense row-major f64),
// then M_lumped. Intended for test caching.
void save_operators(const OperatorSet& ops, const std::string& path);
OperatorSet load_operators(const std::string& path);

}  // namespace steklov
