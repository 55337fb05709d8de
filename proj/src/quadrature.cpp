#include <steklov/quadrature.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

namespace steklov {

namespace {

constexpr double kPi = 3.14159265358979323846;

TriangleRule build_rule(int degree) {
  // Dunavant rules with positive weights and strictly interior nodes.
  std::vector<std::array<double, 4>> orbits;  // (a, b, c, weight) fully expanded
  auto orbit1 = [&](double w) { orbits.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3, w}); };
  auto orbit3 = [&](double a, double w) {
    const double b = 1 - 2 * a;
    orbits.push_back({b, a, a, w});
    orbits.push_back({a, b, a, w});
    orbits.push_back({a, a, b, w});
  };
  auto orbit6 = [&](double a, double b, double w) {
    const double c = 1 - a - b;
    orbits.push_back({a, b, c, w});
    orbits.push_back({a, c, b, w});
    orbits.push_back({b, a, c, w});
    orbits.push_back({b, c, a, w});
    orbits.push_back({c, a, b, w});
    orbits.push_back({c, b, a, w});
  };
  switch (degree) {
    case 1:
      orbit1(1.0);
      break;
    case 2:
      orbit3(1.0 / 6, 1.0 / 3);
      break;
    case 4:
      orbit3(0.445948490915965, 0.22338158967801128);
      orbit3(0.091576213509771, 0.10995174365532218);
      break;
    case 5:
      orbit1(0.225);
      orbit3(0.470142064105115, 0.13239415278850702);
      orbit3(0.101286507323456, 0.1259391805448265);
      break;
    case 6:
      orbit3(0.249286745170910, 0.11678627572637969);
      orbit3(0.063089014491502, 0.0508449063702065);
      orbit6(0.053145049844817, 0.310352451033784, 0.082851075618373557);
      break;
    case 8:
      orbit1(0.14431560767778531);
      orbit3(0.459292588292723, 0.095091634267285161);
      orbit3(0.170569307751760, 0.10321737053471775);
      orbit3(0.050547228317031, 0.032458497623198128);
      orbit6(0.008394777409958, 0.263112829634638, 0.027230314174434923);
      break;
    default:
      throw Error("unsupported triangle rule degree");
  }
  TriangleRule rule;
  rule.nodes.resize(static_cast<Index>(orbits.size()), 3);
  rule.weights.resize(static_cast<Index>(orbits.size()));
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    rule.nodes.row(static_cast<Index>(i)) << orbits[i][0], orbits[i][1], orbits[i][2];
    rule.weights[static_cast<Index>(i)] = orbits[i][3];
  }
  return rule;
}

int supported_degree(int degree) {
  for (int d : {1, 2, 4, 5, 6, 8}) {
    if (degree <= d) return d;
  }
  return 8;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static std::map<int, TriangleRule> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  const int d = supported_degree(degree);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, build_rule(d)).first;
  return it->second;
}

const TriangleRule& collapsed_triangle_rule(int n) {
  static std::map<int, TriangleRule> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    // Map the unit square by (u, v) -> barycentric (1-u, u(1-v), uv); the
    // Jacobian u makes the weight u * w_u * w_v, normalized by area 1/2.
    Vector g, w;
    gauss_legendre(n, g, w);
    TriangleRule rule;
    rule.nodes.resize(n * n, 3);
    rule.weights.resize(n * n);
    Index p = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j, ++p) {
        const double u = g[i], v = g[j];
        rule.nodes.row(p) << 1 - u, u * (1 - v), u * v;
        rule.weights[p] = 2.0 * u * w[i] * w[j];
      }
    }
    it = cache.emplace(n, std::move(rule)).first;
  }
  return it->second;
}

void gauss_legendre(int n, Vector& nodes, Vector& weights) {
  if (n < 1) throw Error("gauss_legendre: need at least one point");
  Matrix jacobi = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (solver.eigenvalues()[i] + 1.0);  // map [-1,1] -> [0,1]
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // already normalized: weights on [0,1] sum to 1
  }
}

PairClass classify_pair(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  int shared = 0;
  for (int i : a) {
    for (int j : b) {
      if (i == j) ++shared;
    }
  }
  switch (shared) {
    case 0: return PairClass::Disjoint;
    case 1: return PairClass::SharedVertex;
    case 2: return PairClass::SharedEdge;
    case 3: return PairClass::Coincident;
    default: throw Error("degenerate triangle in classify_pair");
  }
}

Panel panel_of(const TriangleMesh& mesh, Index t) {
  Panel p;
  p.a = mesh.corner(t, 0);
  p.b = mesh.corner(t, 1);
  p.c = mesh.corner(t, 2);
  p.normal = mesh.normal(t);
  p.area = mesh.areas[t];
  p.ids = {mesh.triangles(t, 0), mesh.triangles(t, 1), mesh.triangles(t, 2)};
  return p;
}

Panel make_panel(const Vec3& a, const Vec3& b, const Vec3& c, const std::array<int, 3>& ids) {
  Panel p;
  p.a = a;
  p.b = b;
  p.c = c;
  const Vec3 cr = (b - a).cross(c - a);
  p.area = 0.5 * cr.norm();
  p.normal = p.area > 0 ? Vec3(cr / cr.norm()) : Vec3::Zero();
  p.ids = ids;
  return p;
}

RegularizedKernel regularized_kernel(KernelFn fn, double epsilon) {
  if (epsilon < 0) throw Error("regularized_kernel: epsilon must be nonnegative");
  return RegularizedKernel{std::move(fn), epsilon};
}

RegularizedKernel single_layer_kernel(double epsilon) {
  return regularized_kernel(
      [](const Vec3&, const Vec3&, const Vec3&, const Vec3&, double r) { return 1.0 / r; },
      epsilon);
}

namespace {

// Relative-coordinate transforms mapping the unit 4-cube onto the touching
// configurations of the product element. Every map keeps the two physical
// arguments apart; the Jacobians absorb the kernel singularity. Derivation
// follows the Duffy/Sauter-Schwab construction over the reference element
// {0 <= x2 <= x1 <= 1}.
std::vector<PairPoint> build_singular_points(PairClass cls, int n) {
  Vector g, w;
  gauss_legendre(n, g, w);
  std::vector<PairPoint> pts;
  auto push = [&pts](double x1, double x2, double y1, double y2, double weight) {
    pts.push_back({x1, x2, y1, y2, weight});
  };
  if (cls == PairClass::Coincident) {
    pts.reserve(static_cast<std::size_t>(6) * n * n * n * n);
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
          for (int i3 = 0; i3 < n; ++i3) {
            const double xi = g[i0], wv = g[i1], a = g[i2], b = g[i3];
            const double jac = xi * (1 - xi) * (1 - xi) * a * w[i0] * w[i1] * w[i2] * w[i3];
            const double p1x1 = xi + (1 - xi) * a, p1x2 = xi * wv + (1 - xi) * a * b;
            const double q1x1 = (1 - xi) * a, q1x2 = (1 - xi) * a * b;
            const double p2x2 = xi + (1 - xi) * a * b;
            const double q2x1 = xi * (1 - wv) + (1 - xi) * a;
            const double p3x1 = xi * wv + (1 - xi) * a, p3x2 = xi * wv + (1 - xi) * a * b;
            push(p1x1, p1x2, q1x1, q1x2, jac);
            push(q1x1, q1x2, p1x1, p1x2, jac);
            push(p1x1, p2x2, q2x1, q1x2, jac);
            push(q2x1, q1x2, p1x1, p2x2, jac);
            push(p3x1, p3x2, p1x1, q1x2, jac);
            push(p1x1, q1x2, p3x1, p3x2, jac);
          }
  } else if (cls == PairClass::SharedEdge) {
    pts.reserve(static_cast<std::size_t>(4) * n * n * n * n);
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
          for (int i3 = 0; i3 < n; ++i3) {
            const double xi = g[i0], s = g[i1], c = g[i2], a = g[i3];
            const double base = w[i0] * w[i1] * w[i2] * w[i3] * xi * xi * (1 - xi);
            const double x1 = xi + (1 - xi) * a;
            // x2 = xi dominates the relative offset
            push(x1, xi, x1 - xi * s * c, xi * s * (1 - c), base * s);
            push(x1 - xi * s * c, xi * s * (1 - c), x1, xi, base * s);
            // x1 - y1 offset dominates
            push(x1, xi * s, xi * (1 - c) + (1 - xi) * a, xi * (1 - c), base);
            push(xi * (1 - c) + (1 - xi) * a, xi * (1 - c), x1, xi * s, base);
          }
  } else if (cls == PairClass::SharedVertex) {
    pts.reserve(static_cast<std::size_t>(2) * n * n * n * n);
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
          for (int i3 = 0; i3 < n; ++i3) {
            const double xi = g[i0], eta = g[i1], u = g[i2], v = g[i3];
            const double jac = xi * xi * xi * eta * w[i0] * w[i1] * w[i2] * w[i3];
            push(xi, xi * u, xi * eta, xi * eta * v, jac);
            push(xi * eta, xi * eta * v, xi, xi * u, jac);
          }
  } else {
    throw Error("singular_pair_points: disjoint pairs use tensor triangle rules");
  }
  return pts;
}

}  // namespace

const std::vector<PairPoint>& singular_pair_points(PairClass cls, int gauss_points) {
  static std::map<std::pair<int, int>, std::vector<PairPoint>> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(static_cast<int>(cls), gauss_points);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_singular_points(cls, gauss_points)).first;
  return it->second;
}

PairAlignment align_pair(const std::array<int, 3>& ids_a, const std::array<int, 3>& ids_b,
                         PairClass cls) {
  PairAlignment out;
  auto find_in_b = [&ids_b](int id) {
    for (int c = 0; c < 3; ++c) {
      if (ids_b[c] == id) return c;
    }
    return -1;
  };
  if (cls == PairClass::Disjoint) return out;
  if (cls == PairClass::Coincident) {
    for (int c = 0; c < 3; ++c) out.perm_b[c] = find_in_b(ids_a[c]);
    return out;
  }
  // Move shared vertices to the front of both charts, in matching order.
  std::vector<int> shared_a;
  for (int c = 0; c < 3; ++c) {
    if (find_in_b(ids_a[c]) >= 0) shared_a.push_back(c);
  }
  int next_a = 0, used_a = 0, used_b = 0;
  std::array<bool, 3> taken_b{false, false, false};
  for (int c : shared_a) {
    out.perm_a[next_a] = c;
    out.perm_b[next_a] = find_in_b(ids_a[c]);
    taken_b[out.perm_b[next_a]] = true;
    ++next_a;
  }
  used_a = next_a;
  for (int c = 0; c < 3 && used_a < 3; ++c) {
    bool is_shared = false;
    for (int s : shared_a) is_shared |= (s == c);
    if (!is_shared) out.perm_a[used_a++] = c;
  }
  used_b = next_a;
  for (int c = 0; c < 3 && used_b < 3; ++c) {
    if (!taken_b[c]) out.perm_b[used_b++] = c;
  }
  return out;
}

namespace {

Vec3 chart_point(const Vec3& v0, const Vec3& v1, const Vec3& v2, double x1, double x2) {
  return v0 + x1 * (v1 - v0) + x2 * (v2 - v1);
}

// Barycentric coordinates of the chart point w.r.t. the permuted corners.
std::array<double, 3> chart_bary(double x1, double x2) { return {1 - x1, x1 - x2, x2}; }

}  // namespace

double pair_integral(const RegularizedKernel& kernel, const Panel& A, const Panel& B, int basis_i,
                     int basis_j, int order) {
  if (order < 1) throw Error("pair_integral: order must be >= 1");
  if (A.area <= 0 || B.area <= 0) throw DegenerateTriangle("pair_integral: degenerate panel");
  const PairClass cls = classify_pair(A.ids, B.ids);
  double sum = 0;
  if (cls == PairClass::Disjoint) {
    const TriangleRule& rule = triangle_rule(order);
    const std::array<Vec3, 3> pa{A.a, A.b, A.c};
    const std::array<Vec3, 3> pb{B.a, B.b, B.c};
    for (Index p = 0; p < rule.weights.size(); ++p) {
      const Vec3 x = rule.nodes(p, 0) * pa[0] + rule.nodes(p, 1) * pa[1] + rule.nodes(p, 2) * pa[2];
      const double phi_x = rule.nodes(p, basis_i);
      for (Index q = 0; q < rule.weights.size(); ++q) {
        const Vec3 y =
            rule.nodes(q, 0) * pb[0] + rule.nodes(q, 1) * pb[1] + rule.nodes(q, 2) * pb[2];
        const double r = (x - y).norm() + kernel.epsilon;
        if (r == 0) throw SingularEvaluation("coincident quadrature points");
        sum += rule.weights[p] * rule.weights[q] * phi_x * rule.nodes(q, basis_j) *
               kernel.fn(x, y, A.normal, B.normal, r);
      }
    }
    return sum * A.area * B.area / (4 * kPi);
  }

  const PairAlignment perm = align_pair(A.ids, B.ids, cls);
  const std::array<Vec3, 3> ca{A.a, A.b, A.c};
  const std::array<Vec3, 3> cb{B.a, B.b, B.c};
  const Vec3 a0 = ca[perm.perm_a[0]], a1 = ca[perm.perm_a[1]], a2 = ca[perm.perm_a[2]];
  const Vec3 b0 = cb[perm.perm_b[0]], b1 = cb[perm.perm_b[1]], b2 = cb[perm.perm_b[2]];
  // Which permuted slot holds the requested hat function.
  int slot_i = 0, slot_j = 0;
  for (int c = 0; c < 3; ++c) {
    if (perm.perm_a[c] == basis_i) slot_i = c;
    if (perm.perm_b[c] == basis_j) slot_j = c;
  }
  for (const PairPoint& pt : singular_pair_points(cls, order)) {
    const Vec3 x = chart_point(a0, a1, a2, pt.x1, pt.x2);
    const Vec3 y = chart_point(b0, b1, b2, pt.y1, pt.y2);
    const double r = (x - y).norm() + kernel.epsilon;
    if (r == 0) throw SingularEvaluation("coincident quadrature points");
    sum += pt.weight * chart_bary(pt.x1, pt.x2)[slot_i] * chart_bary(pt.y1, pt.y2)[slot_j] *
           kernel.fn(x, y, A.normal, B.normal, r);
  }
  return sum * 4 * A.area * B.area / (4 * kPi);
}

}  // namespace steklov
