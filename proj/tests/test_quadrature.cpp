#include <doctest.h>

#include <steklov/operators.hpp>
#include <steklov/quadrature.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace steklov;

namespace {

constexpr double kPi = 3.14159265358979323846;

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Reference tensor-Gauss integration over the chart element {0<=x2<=x1<=1}
// squared, for validating the touching-pair transforms as exact changes of
// variables.
template <class F>
double reference_product_integral(const F& f, int n) {
  Vector g, w;
  gauss_legendre(n, g, w);
  double sum = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double x1 = g[i], x2 = g[j] * x1;  // x2 in [0, x1]
          const double y1 = g[k], y2 = g[l] * y1;
          sum += w[i] * w[j] * w[k] * w[l] * x1 * y1 * f(x1, x2, y1, y2);
        }
  return sum;
}

template <class F>
double transformed_integral(PairClass cls, const F& f, int n) {
  double sum = 0;
  for (const PairPoint& p : singular_pair_points(cls, n)) {
    sum += p.weight * f(p.x1, p.x2, p.y1, p.y2);
  }
  return sum;
}

// Independent oracle for the coincident single-layer pair: outer quadrature
// over a uniformly refined copy of A, inner integral by Duffy fans around the
// projection of the outer point.
double duffy_oracle_self_single_layer(const Panel& tri, int basis_i, int basis_j, int level,
                                      int degree) {
  const TriangleRule& rule = triangle_rule(degree);
  const Vec3 corners[3] = {tri.a, tri.b, tri.c};

  // Inner: int_B phi_j(y)/|x-y| dy with x inside B, fan split at x.
  auto inner = [&](const Vec3& x, int npts) {
    Vector g, w;
    gauss_legendre(npts, g, w);
    double total = 0;
    for (int e = 0; e < 3; ++e) {
      const Vec3 p = corners[e], q = corners[(e + 1) % 3];
      // y = x + s[(1-t)(p-x) + t(q-x)], Jacobian = 2 area(x,p,q) * s
      const double segment_area = 0.5 * ((p - x).cross(q - x)).norm();
      if (segment_area <= 0) continue;
      for (int si = 0; si < npts; ++si) {
        for (int ti = 0; ti < npts; ++ti) {
          const double s = g[si], t = g[ti];
          const Vec3 dir = (1 - t) * (p - x) + t * (q - x);
          const Vec3 y = x + s * dir;
          // barycentric of y in the triangle for the hat value
          const Vec3 v0 = tri.b - tri.a, v1 = tri.c - tri.a, v2 = y - tri.a;
          const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
          const double d20 = v2.dot(v0), d21 = v2.dot(v1);
          const double denom = d00 * d11 - d01 * d01;
          const double lb = (d11 * d20 - d01 * d21) / denom;
          const double lc = (d00 * d21 - d01 * d20) / denom;
          const double bary[3] = {1 - lb - lc, lb, lc};
          // 1/|x-y| = 1/(s |dir|); ds dt Jacobian = 2*segment_area*s
          total += w[si] * w[ti] * 2.0 * segment_area * bary[basis_j] / dir.norm();
        }
      }
    }
    return total;
  };

  // Outer: uniform 4-way refinement of A to `level`, then a triangle rule.
  struct Sub {
    Vec3 a, b, c;
  };
  std::vector<Sub> subs = {{tri.a, tri.b, tri.c}};
  for (int l = 0; l < level; ++l) {
    std::vector<Sub> next;
    next.reserve(subs.size() * 4);
    for (const Sub& s : subs) {
      const Vec3 ab = 0.5 * (s.a + s.b), bc = 0.5 * (s.b + s.c), ca = 0.5 * (s.c + s.a);
      next.push_back({s.a, ab, ca});
      next.push_back({ab, s.b, bc});
      next.push_back({ca, bc, s.c});
      next.push_back({ab, bc, ca});
    }
    subs = std::move(next);
  }
  double outer = 0;
  for (const Sub& s : subs) {
    const double area = 0.5 * ((s.b - s.a).cross(s.c - s.a)).norm();
    for (Index p = 0; p < rule.weights.size(); ++p) {
      const Vec3 x = rule.nodes(p, 0) * s.a + rule.nodes(p, 1) * s.b + rule.nodes(p, 2) * s.c;
      const Vec3 v0 = tri.b - tri.a, v1 = tri.c - tri.a, v2 = x - tri.a;
      const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
      const double d20 = v2.dot(v0), d21 = v2.dot(v1);
      const double denom = d00 * d11 - d01 * d01;
      const double lb = (d11 * d20 - d01 * d21) / denom;
      const double lc = (d00 * d21 - d01 * d20) / denom;
      const double bary[3] = {1 - lb - lc, lb, lc};
      outer += rule.weights[p] * area * bary[basis_i] * inner(x, 12);
    }
  }
  return outer / (4 * kPi);
}

}  // namespace

TEST_CASE("triangle rules are positive, interior, normalized and exact") {
  for (int degree : {1, 2, 4, 5, 6, 8}) {
    const TriangleRule& rule = triangle_rule(degree);
    CHECK(std::abs(rule.weights.sum() - 1.0) < 1e-15 * rule.weights.size());
    for (Index i = 0; i < rule.weights.size(); ++i) {
      CHECK(rule.weights[i] > 0);
      for (int c = 0; c < 3; ++c) CHECK(rule.nodes(i, c) > 1e-6);  // strictly interior
    }
    // Exactness on x^p y^q over conv{(0,0),(1,0),(0,1)}: p! q! / (p+q+2)!.
    for (int p = 0; p + 0 <= degree; ++p) {
      for (int q = 0; p + q <= degree; ++q) {
        double sum = 0;
        for (Index i = 0; i < rule.weights.size(); ++i) {
          const double x = rule.nodes(i, 1), y = rule.nodes(i, 2);
          sum += rule.weights[i] * std::pow(x, p) * std::pow(y, q);
        }
        sum *= 0.5;  // reference area
        const double exact = factorial(p) * factorial(q) / factorial(p + q + 2);
        CHECK(std::abs(sum - exact) < 1e-14);
      }
    }
  }
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  for (int n : {1, 2, 4, 8}) {
    Vector g, w;
    gauss_legendre(n, g, w);
    CHECK(std::abs(w.sum() - 1.0) < 1e-14);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += w[i] * std::pow(g[i], d);
      CHECK(std::abs(sum - 1.0 / (d + 1)) < 1e-13);
    }
  }
}

TEST_CASE("classify_pair counts shared indices") {
  CHECK(classify_pair({0, 1, 2}, {3, 4, 5}) == PairClass::Disjoint);
  CHECK(classify_pair({0, 1, 2}, {0, 1, 2}) == PairClass::Coincident);
  CHECK(classify_pair({0, 1, 2}, {1, 2, 7}) == PairClass::SharedEdge);
  CHECK(classify_pair({0, 1, 2}, {2, 8, 9}) == PairClass::SharedVertex);
  CHECK(classify_pair({0, 1, 2}, {2, 0, 9}) == PairClass::SharedEdge);
}

TEST_CASE("touching-pair transforms are exact changes of variables") {
  // Random polynomial of modest degree: with 8 Gauss points per dimension the
  // transformed sums must match plain tensor quadrature to machine precision.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    double c[3][3][3][3];
    for (auto& a : c)
      for (auto& b : a)
        for (auto& d : b)
          for (double& e : d) e = coeff(rng);
    auto poly = [&](double x1, double x2, double y1, double y2) {
      double sum = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              sum += c[i][j][k][l] * std::pow(x1, i) * std::pow(x2, j) * std::pow(y1, k) *
                     std::pow(y2, l);
            }
      return sum;
    };
    const double reference = reference_product_integral(poly, 12);
    for (PairClass cls :
         {PairClass::Coincident, PairClass::SharedEdge, PairClass::SharedVertex}) {
      const double transformed = transformed_integral(cls, poly, 10);
      CHECK(std::abs(transformed - reference) < 1e-12 * std::max(1.0, std::abs(reference)));
    }
  }
}

TEST_CASE("constant kernel reproduces the product of hat integrals") {
  // p == 4*pi cancels the prefactor: the integral is (A/3)^2 for any corners.
  const RegularizedKernel fourpi = regularized_kernel(
      [](const Vec3&, const Vec3&, const Vec3&, const Vec3&, double) { return 4 * kPi; }, 0.0);
  const Panel tri = make_panel(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), {0, 1, 2});
  const double a3 = tri.area / 3.0;

  for (int bi = 0; bi < 3; ++bi) {
    for (int bj = 0; bj < 3; ++bj) {
      CHECK(pair_integral(fourpi, tri, tri, bi, bj, 6) == doctest::Approx(a3 * a3).epsilon(1e-10));
    }
  }
  // Shared edge and shared vertex configurations against the same closed form.
  const Panel edge_mate =
      make_panel(Vec3(1, 0, 0), Vec3(0, 0, 0), Vec3(0.3, -0.9, 0.2), {1, 0, 7});
  CHECK(pair_integral(fourpi, tri, edge_mate, 0, 1, 6) ==
        doctest::Approx(a3 * (edge_mate.area / 3.0)).epsilon(1e-10));
  const Panel vertex_mate =
      make_panel(Vec3(0, 1, 0), Vec3(1.2, 1.4, 0.3), Vec3(-0.2, 1.8, -0.4), {2, 8, 9});
  CHECK(pair_integral(fourpi, tri, vertex_mate, 2, 0, 6) ==
        doctest::Approx(a3 * (vertex_mate.area / 3.0)).epsilon(1e-10));
}

TEST_CASE("far disjoint single-layer pair approaches the point-mass value") {
  const Panel a = make_panel(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), {0, 1, 2});
  const Panel b = make_panel(Vec3(100, 0, 0), Vec3(101, 0, 0), Vec3(100, 1, 0), {3, 4, 5});
  const double value = pair_integral(single_layer_kernel(), a, b, 0, 0, 6);
  const double point_mass = (a.area / 3.0) * (b.area / 3.0) / (4 * kPi * 100.0);
  CHECK(std::abs(value - point_mass) < 0.01 * point_mass);
}

TEST_CASE("antisymmetric kernel cancels on the self pair") {
  const RegularizedKernel anti = regularized_kernel(
      [](const Vec3& x, const Vec3& y, const Vec3&, const Vec3&, double) {
        return x.x() - y.x();
      },
      0.0);
  const Panel tri = make_panel(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), {0, 1, 2});
  CHECK(std::abs(pair_integral(anti, tri, tri, 1, 1, 6)) < 1e-12);
}

TEST_CASE("coincident single layer matches the independent duffy oracle") {
  const Panel tri = make_panel(Vec3(0.1, -0.2, 0.3), Vec3(1.0, 0.1, 0.2), Vec3(0.2, 0.9, -0.1),
                               {0, 1, 2});
  for (auto [bi, bj] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{2, 1}}) {
    const double oracle = duffy_oracle_self_single_layer(tri, bi, bj, 3, 8);
    const double value = pair_integral(single_layer_kernel(), tri, tri, bi, bj, 8);
    CHECK(value == doctest::Approx(oracle).epsilon(2e-5));
    // The default 4-point rule should already be close to the converged value.
    const double coarse = pair_integral(single_layer_kernel(), tri, tri, bi, bj, 4);
    CHECK(coarse == doctest::Approx(value).epsilon(1e-4));
  }
}

TEST_CASE("singular rules converge as points increase") {
  const Panel a = make_panel(Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.2, 1, 0.3), {0, 1, 2});
  const Panel b = make_panel(Vec3(1, 0.1, 0), Vec3(0, 0, 0), Vec3(0.1, -0.8, 0.5), {1, 0, 9});
  double prev = 0;
  double prev_err = 1e9;
  const double reference = pair_integral(single_layer_kernel(), a, b, 0, 0, 14);
  for (int n : {3, 5, 7, 9}) {
    const double value = pair_integral(single_layer_kernel(), a, b, 0, 0, n);
    const double err = std::abs(value - reference);
    CHECK(err < prev_err + 1e-14);
    prev_err = err;
    prev = value;
  }
  CHECK(std::abs(prev - reference) < 1e-7 * std::abs(reference));
}

TEST_CASE("doubling the order changes results within the estimated truncation error") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Panel a = make_panel(Vec3(u(rng), u(rng), u(rng)), Vec3(1 + u(rng), u(rng), u(rng)),
                               Vec3(u(rng), 1 + u(rng), u(rng)), {0, 1, 2});
    const Panel b =
        make_panel(Vec3(3 + u(rng), u(rng), u(rng)), Vec3(4 + u(rng), u(rng), u(rng)),
                   Vec3(3 + u(rng), 1 + u(rng), u(rng)), {3, 4, 5});
    const double i1 = pair_integral(single_layer_kernel(), a, b, 0, 0, 2);
    const double i2 = pair_integral(single_layer_kernel(), a, b, 0, 0, 4);
    const double i4 = pair_integral(single_layer_kernel(), a, b, 0, 0, 8);
    const double estimated = std::abs(i1 - i2);
    CHECK(std::abs(i2 - i4) <= 10 * estimated + 1e-15);
  }
}

TEST_CASE("single-layer pair integral is symmetric under swapping") {
  const Panel a = make_panel(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0.2), {0, 1, 2});
  const Panel b = make_panel(Vec3(2, 0.3, 0), Vec3(3, 0, 0.4), Vec3(2, 1, 0), {3, 4, 5});
  for (auto [bi, bj] : {std::pair{0, 0}, std::pair{1, 2}}) {
    const double ab = pair_integral(single_layer_kernel(), a, b, bi, bj, 6);
    const double ba = pair_integral(single_layer_kernel(), b, a, bj, bi, 6);
    CHECK(std::abs(ab - ba) < 1e-12 * std::abs(ab));
  }
}

TEST_CASE("regularized kernels substitute r + eps") {
  const auto sl = single_layer_kernel(1e-4);
  const Vec3 x(0, 0, 0), y(1, 0, 0), n(0, 0, 1);
  CHECK(sl(x, y, n, n) == doctest::Approx(1.0 / 1.0001).epsilon(1e-14));
  const auto plain = single_layer_kernel(0.0);
  CHECK(plain(x, y, n, n) == doctest::Approx(1.0).epsilon(1e-14));
  // Regularized value never exceeds the unregularized one for 1/r.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    CHECK(sl(Vec3::Zero(), p, n, n) <= plain(Vec3::Zero(), p, n, n));
  }
}

TEST_CASE("no kernel evaluation receives coincident points over a sphere assembly") {
  const TriangleMesh mesh = fixtures::icosphere(1);
  double min_r = 1e300;
  const RegularizedKernel probe = regularized_kernel(
      [&min_r](const Vec3&, const Vec3&, const Vec3&, const Vec3&, double r) {
        min_r = std::min(min_r, r);
        return 1.0 / r;
      },
      0.0);
  for (Index t1 = 0; t1 < mesh.num_triangles(); ++t1) {
    for (Index t2 = 0; t2 < mesh.num_triangles(); ++t2) {
      pair_integral(probe, panel_of(mesh, t1), panel_of(mesh, t2), 0, 0, 4);
    }
  }
  CHECK(min_r > 0);
  CHECK(min_r < 1e-1);  // singular maps do drive points close together
}
