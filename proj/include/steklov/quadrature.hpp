#pragma once

#include <steklov/mesh.hpp>
#include <steklov/types.hpp>

#include <functional>
#include <vector>

namespace steklov {

// Symmetric quadrature rule on the reference triangle, barycentric nodes.
struct TriangleRule {
  Points nodes;    // one row per node, barycentric triple
  Vector weights;  // positive, sum to 1
};

// Rules of exactness degree 1, 2, 4, 5, 6 and 8; other degrees round up.
// All nodes are strictly interior.
const TriangleRule& triangle_rule(int degree);

// n x n tensor Gauss rule collapsed onto the triangle (exact to degree
// 2n - 2); weights positive, nodes interior. Used for nearly touching panels
// where fixed-degree rules stall.
const TriangleRule& collapsed_triangle_rule(int n);

// Gauss-Legendre nodes/weights on (0,1) via Golub-Welsch.
void gauss_legendre(int n, Vector& nodes, Vector& weights);

enum class PairClass { Disjoint, SharedVertex, SharedEdge, Coincident };

// Classification by the number of shared vertex indices.
PairClass classify_pair(const std::array<int, 3>& a, const std::array<int, 3>& b);

// One triangle pulled out of a mesh: geometry plus global vertex ids.
struct Panel {
  Vec3 a, b, c;
  Vec3 normal = Vec3::Zero();
  double area = 0;
  std::array<int, 3> ids{-1, -2, -3};
};

Panel panel_of(const TriangleMesh& mesh, Index t);
Panel make_panel(const Vec3& a, const Vec3& b, const Vec3& c,
                 const std::array<int, 3>& ids = {0, 1, 2});

// Pointwise kernels take the (possibly regularized) distance r alongside the
// raw points, so replacing |x-y| by |x-y| + eps composes with any kernel.
using KernelFn =
    std::function<double(const Vec3& x, const Vec3& y, const Vec3& nx, const Vec3& ny, double r)>;

struct RegularizedKernel {
  KernelFn fn;
  double epsilon = 0;

  double operator()(const Vec3& x, const Vec3& y, const Vec3& nx, const Vec3& ny) const {
    return fn(x, y, nx, ny, (x - y).norm() + epsilon);
  }
};

RegularizedKernel regularized_kernel(KernelFn fn, double epsilon);
RegularizedKernel single_layer_kernel(double epsilon = 0);

// One quadrature point pair in the reference coordinates of an aligned panel
// pair. Reference element is {0 <= x2 <= x1 <= 1} with chart
// chi(x1,x2) = v0 + x1 (v1 - v0) + x2 (v2 - v1).
struct PairPoint {
  double x1, x2, y1, y2, weight;
};

// Transformed tensor-Gauss quadrature for the touching classes, cached per
// (class, points-per-dimension). The maps concentrate points so that the two
// physical arguments never coincide.
const std::vector<PairPoint>& singular_pair_points(PairClass cls, int gauss_points);

// Corner permutations moving shared vertices to the leading chart corners.
// After alignment, panel corner permA[k] of A pairs with permB[k] of B for
// k below the shared count.
struct PairAlignment {
  std::array<int, 3> perm_a{0, 1, 2};
  std::array<int, 3> perm_b{0, 1, 2};
};

PairAlignment align_pair(const std::array<int, 3>& ids_a, const std::array<int, 3>& ids_b,
                         PairClass cls);

// (1/4pi) * integral over A x B of p(x,y) phi_i(x) phi_j(y), with phi the hat
// function of the given local corner. `order` is the target polynomial degree
// for disjoint pairs and the Gauss points per dimension for touching pairs.
double pair_integral(const RegularizedKernel& kernel, const Panel& A, const Panel& B, int basis_i,
                     int basis_j, int order);

}  // namespace steklov
