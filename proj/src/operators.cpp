#include <steklov/operators.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <vector>

namespace steklov {

namespace {

constexpr double kPi = 3.14159265358979323846;

double kernel_value(KernelKind kind, const Vec3& x, const Vec3& y, const Vec3& nx, const Vec3& ny,
                    double r) {
  switch (kind) {
    case KernelKind::SingleLayer:
      return 1.0 / r;
    case KernelKind::DoubleLayer:
      return (x - y).dot(ny) / (r * r * r);
    case KernelKind::AdjointDoubleLayer:
      return (y - x).dot(nx) / (r * r * r);
    case KernelKind::Hypersingular: {
      const double r3 = r * r * r;
      return -nx.dot(ny) / r3 - 3.0 * ((x - y).dot(ny)) * ((y - x).dot(nx)) / (r3 * r * r);
    }
  }
  return 0;
}

}  // namespace

double kernel_eval(KernelKind kind, const Vec3& x, const Vec3& y, const Vec3& nx, const Vec3& ny,
                   double epsilon) {
  const double dist = (x - y).norm();
  if (dist == 0) throw CoincidentPoints("kernel_eval: x == y");
  return kernel_value(kind, x, y, nx, ny, dist + epsilon);
}

RegularizedKernel named_kernel(KernelKind kind, double epsilon) {
  return regularized_kernel(
      [kind](const Vec3& x, const Vec3& y, const Vec3& nx, const Vec3& ny, double r) {
        return kernel_value(kind, x, y, nx, ny, r);
      },
      epsilon);
}

SparseMatrix galerkin_mass(const TriangleMesh& mesh) {
  // Exact hat-function products: A/6 on the diagonal, A/12 across each edge.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.areas[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        triplets.emplace_back(mesh.triangles(t, a), mesh.triangles(t, b),
                              a == b ? area / 6.0 : area / 12.0);
      }
    }
  }
  SparseMatrix mass(mesh.num_vertices(), mesh.num_vertices());
  mass.setFromTriplets(triplets.begin(), triplets.end());
  return mass;
}

Vector lumped_mass(const TriangleMesh& mesh) {
  Vector lumped = Vector::Zero(mesh.num_vertices());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) lumped[mesh.triangles(t, c)] += mesh.areas[t] / 3.0;
  }
  return lumped;
}

namespace {

struct PanelCache {
  Panel panel;
  Vec3 centroid;
  double diameter = 0;
  Vec3 curl[3];       // surface curl of the corner hats, constant per panel
  Matrix pts_reg;     // physical quadrature points, one row each
  Matrix pts_near;
  Matrix pts_close;
  int min_vertex = 0;
  int max_vertex = 0;
};

struct AssemblyScratch {
  // Kernel moments of one ordered panel pair, indexed by chart corner slots.
  double v[3][3];
  double k[3][3];
  double sl;  // constant-basis single layer, feeds the curl identity for H
  void reset() {
    for (auto& row : v) row[0] = row[1] = row[2] = 0;
    for (auto& row : k) row[0] = row[1] = row[2] = 0;
    sl = 0;
  }
};

int resolve_threads(int requested, Index n) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  return static_cast<int>(std::min<Index>(threads, std::max<Index>(n, 1)));
}

}  // namespace

OperatorSet assemble(const TriangleMesh& mesh, const AssemblyOptions& options) {
  const Index n = mesh.num_vertices();
  const Index m = mesh.num_triangles();
  if (n < 4) throw Error("assemble: mesh needs at least 4 vertices");
  const QuadratureOptions& quad = options.quadrature;
  const double eps = quad.epsilon;

  const TriangleRule& rule_reg = triangle_rule(quad.regular_degree);
  const TriangleRule& rule_near = triangle_rule(quad.near_degree);
  const TriangleRule& rule_close = collapsed_triangle_rule(quad.close_points);

  std::vector<PanelCache> panels(static_cast<std::size_t>(m));
  for (Index t = 0; t < m; ++t) {
    PanelCache& cache = panels[static_cast<std::size_t>(t)];
    cache.panel = panel_of(mesh, t);
    if (cache.panel.area <= 0) {
      throw DegenerateTriangle("assemble: triangle " + std::to_string(t) + " has zero area");
    }
    const Vec3 a = cache.panel.a, b = cache.panel.b, c = cache.panel.c;
    cache.centroid = (a + b + c) / 3.0;
    cache.diameter = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    const double inv2a = 1.0 / (2.0 * cache.panel.area);
    cache.curl[0] = -(c - b) * inv2a;
    cache.curl[1] = -(a - c) * inv2a;
    cache.curl[2] = -(b - a) * inv2a;
    auto fill = [&](const TriangleRule& rule, Matrix& pts) {
      pts.resize(rule.weights.size(), 3);
      for (Index p = 0; p < rule.weights.size(); ++p) {
        pts.row(p) =
            (rule.nodes(p, 0) * a + rule.nodes(p, 1) * b + rule.nodes(p, 2) * c).transpose();
      }
    };
    fill(rule_reg, cache.pts_reg);
    fill(rule_near, cache.pts_near);
    fill(rule_close, cache.pts_close);
    cache.min_vertex = std::min({cache.panel.ids[0], cache.panel.ids[1], cache.panel.ids[2]});
    cache.max_vertex = std::max({cache.panel.ids[0], cache.panel.ids[1], cache.panel.ids[2]});
  }

  OperatorSet ops;
  ops.V = Matrix::Zero(n, n);
  ops.K = Matrix::Zero(n, n);
  ops.H = Matrix::Zero(n, n);
  ops.M = galerkin_mass(mesh);
  ops.M_lumped = lumped_mass(mesh);
  ops.closed = is_closed(mesh);
  ops.epsilon = eps;

  int threads = resolve_threads(options.threads, n);
  // Per-thread accumulators; keep the footprint bounded.
  while (threads > 1 &&
         static_cast<double>(threads) * 3.0 * static_cast<double>(n) * n * 8.0 > 2e9) {
    --threads;
  }

  // Threads own contiguous panel ranges and accumulate into private matrices;
  // the ranges are reduced in fixed order afterwards, so results are bitwise
  // reproducible for a fixed thread count.
  auto worker = [&](Index t1_lo, Index t1_hi, Matrix& v_out, Matrix& k_out, Matrix& h_out) {
    AssemblyScratch moments;
    for (Index t1 = t1_lo; t1 < t1_hi; ++t1) {
      const PanelCache& p1 = panels[static_cast<std::size_t>(t1)];
      for (Index t2 = 0; t2 < m; ++t2) {
        const PanelCache& p2 = panels[static_cast<std::size_t>(t2)];
        const PairClass cls = classify_pair(p1.panel.ids, p2.panel.ids);
        moments.reset();
        double scale = 0;
        int slot_of_corner_a[3] = {0, 1, 2};
        int slot_of_corner_b[3] = {0, 1, 2};

        if (cls == PairClass::Disjoint) {
          const double dist = (p1.centroid - p2.centroid).norm();
          const double size = std::max(p1.diameter, p2.diameter);
          const int tier = dist < quad.close_ratio * size ? 2
                           : dist < quad.near_ratio * size ? 1
                                                           : 0;
          const TriangleRule& ra = tier == 2 ? rule_close : tier == 1 ? rule_near : rule_reg;
          const Matrix& xs = tier == 2 ? p1.pts_close : tier == 1 ? p1.pts_near : p1.pts_reg;
          const Matrix& ys = tier == 2 ? p2.pts_close : tier == 1 ? p2.pts_near : p2.pts_reg;
          const Vec3 ny = p2.panel.normal;
          for (Index p = 0; p < ra.weights.size(); ++p) {
            const Vec3 x = xs.row(p).transpose();
            const double la0 = ra.nodes(p, 0), la1 = ra.nodes(p, 1), la2 = ra.nodes(p, 2);
            for (Index q = 0; q < ra.weights.size(); ++q) {
              const Vec3 y = ys.row(q).transpose();
              const Vec3 d = x - y;
              const double r = d.norm() + eps;
              const double w = ra.weights[p] * ra.weights[q];
              const double kv = w / r;
              const double kk = w * d.dot(ny) / (r * r * r);
              const double lb0 = ra.nodes(q, 0), lb1 = ra.nodes(q, 1), lb2 = ra.nodes(q, 2);
              moments.sl += kv;
              moments.v[0][0] += kv * la0 * lb0;
              moments.v[0][1] += kv * la0 * lb1;
              moments.v[0][2] += kv * la0 * lb2;
              moments.v[1][0] += kv * la1 * lb0;
              moments.v[1][1] += kv * la1 * lb1;
              moments.v[1][2] += kv * la1 * lb2;
              moments.v[2][0] += kv * la2 * lb0;
              moments.v[2][1] += kv * la2 * lb1;
              moments.v[2][2] += kv * la2 * lb2;
              moments.k[0][0] += kk * la0 * lb0;
              moments.k[0][1] += kk * la0 * lb1;
              moments.k[0][2] += kk * la0 * lb2;
              moments.k[1][0] += kk * la1 * lb0;
              moments.k[1][1] += kk * la1 * lb1;
              moments.k[1][2] += kk * la1 * lb2;
              moments.k[2][0] += kk * la2 * lb0;
              moments.k[2][1] += kk * la2 * lb1;
              moments.k[2][2] += kk * la2 * lb2;
            }
          }
          scale = p1.panel.area * p2.panel.area / (4 * kPi);
        } else {
          const PairAlignment perm = align_pair(p1.panel.ids, p2.panel.ids, cls);
          const Vec3 ca[3] = {p1.panel.a, p1.panel.b, p1.panel.c};
          const Vec3 cb[3] = {p2.panel.a, p2.panel.b, p2.panel.c};
          const Vec3 a0 = ca[perm.perm_a[0]], a1 = ca[perm.perm_a[1]], a2 = ca[perm.perm_a[2]];
          const Vec3 b0 = cb[perm.perm_b[0]], b1 = cb[perm.perm_b[1]], b2 = cb[perm.perm_b[2]];
          for (int c = 0; c < 3; ++c) {
            slot_of_corner_a[perm.perm_a[c]] = c;
            slot_of_corner_b[perm.perm_b[c]] = c;
          }
          const Vec3 ny = p2.panel.normal;
          // The double-layer numerator vanishes identically on a flat
          // self-pair, and the remaining kernels converge quickly there;
          // edge and vertex neighbours keep the full point budget.
          const int points = cls == PairClass::Coincident
                                 ? std::max(5, quad.singular_points - 3)
                                 : quad.singular_points;
          for (const PairPoint& pt : singular_pair_points(cls, points)) {
            const Vec3 x = a0 + pt.x1 * (a1 - a0) + pt.x2 * (a2 - a1);
            const Vec3 y = b0 + pt.y1 * (b1 - b0) + pt.y2 * (b2 - b1);
            const Vec3 d = x - y;
            const double r = d.norm() + eps;
            const double kv = pt.weight / r;
            const double kk = pt.weight * d.dot(ny) / (r * r * r);
            const double la[3] = {1 - pt.x1, pt.x1 - pt.x2, pt.x2};
            const double lb[3] = {1 - pt.y1, pt.y1 - pt.y2, pt.y2};
            moments.sl += kv;
            for (int a = 0; a < 3; ++a) {
              for (int b = 0; b < 3; ++b) {
                moments.v[a][b] += kv * la[a] * lb[b];
                moments.k[a][b] += kk * la[a] * lb[b];
              }
            }
          }
          scale = 4 * p1.panel.area * p2.panel.area / (4 * kPi);
        }

        for (int a = 0; a < 3; ++a) {
          const Index i = p1.panel.ids[a];
          const int sa = slot_of_corner_a[a];
          for (int b = 0; b < 3; ++b) {
            const Index j = p2.panel.ids[b];
            const int sb = slot_of_corner_b[b];
            v_out(i, j) += scale * moments.v[sa][sb];
            k_out(i, j) += scale * moments.k[sa][sb];
            h_out(i, j) += scale * moments.sl * p1.curl[a].dot(p2.curl[b]);
          }
        }
      }
    }
  };

  if (threads == 1) {
    worker(0, m, ops.V, ops.K, ops.H);
  } else {
    std::vector<Matrix> vs(threads), ks(threads), hs(threads);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      vs[t] = Matrix::Zero(n, n);
      ks[t] = Matrix::Zero(n, n);
      hs[t] = Matrix::Zero(n, n);
      const Index lo = m * t / threads;
      const Index hi = m * (t + 1) / threads;
      pool.emplace_back(worker, lo, hi, std::ref(vs[t]), std::ref(ks[t]), std::ref(hs[t]));
    }
    for (auto& th : pool) th.join();
    for (int t = 0; t < threads; ++t) {
      ops.V += vs[t];
      ops.K += ks[t];
      ops.H += hs[t];
    }
  }

  // Rows are integrated independently; restore exact symmetry of the two
  // self-adjoint operators.
  ops.V = ((ops.V + ops.V.transpose()) * 0.5).eval();
  ops.H = ((ops.H + ops.H.transpose()) * 0.5).eval();
  return ops;
}

namespace {

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw ParseError("operator dump truncated");
}

void write_matrix(std::ofstream& out, const Matrix& mat) {
  for (Index i = 0; i < mat.rows(); ++i) {
    for (Index j = 0; j < mat.cols(); ++j) {
      const double value = mat(i, j);
      write_raw(out, &value, sizeof(value));
    }
  }
}

Matrix read_matrix(std::ifstream& in, Index n) {
  Matrix mat(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double value;
      read_raw(in, &value, sizeof(value));
      mat(i, j) = value;
    }
  }
  return mat;
}

}  // namespace

void save_operators(const OperatorSet& ops, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const char magic[8] = {'S', 'T', 'K', 'O', 'P', 'S', '0', '1'};
  write_raw(out, magic, sizeof(magic));
  const std::uint64_t n = static_cast<std::uint64_t>(ops.size());
  write_raw(out, &n, sizeof(n));
  const std::uint8_t closed = ops.closed ? 1 : 0;
  write_raw(out, &closed, sizeof(closed));
  write_raw(out, &ops.epsilon, sizeof(ops.epsilon));
  write_matrix(out, ops.V);
  write_matrix(out, ops.K);
  write_matrix(out, ops.H);
  write_matrix(out, Matrix(ops.M));
  for (Index i = 0; i < ops.M_lumped.size(); ++i) {
    const double value = ops.M_lumped[i];
    write_raw(out, &value, sizeof(value));
  }
}

OperatorSet load_operators(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  char magic[8];
  read_raw(in, magic, sizeof(magic));
  if (std::string(magic, 8) != "STKOPS01") throw ParseError("bad operator dump magic");
  std::uint64_t n64;
  read_raw(in, &n64, sizeof(n64));
  const Index n = static_cast<Index>(n64);
  OperatorSet ops;
  std::uint8_t closed;
  read_raw(in, &closed, sizeof(closed));
  ops.closed = closed != 0;
  read_raw(in, &ops.epsilon, sizeof(ops.epsilon));
  ops.V = read_matrix(in, n);
  ops.K = read_matrix(in, n);
  ops.H = read_matrix(in, n);
  ops.M = read_matrix(in, n).sparseView();
  ops.M_lumped.resize(n);
  for (Index i = 0; i < n; ++i) {
    double value;
    read_raw(in, &value, sizeof(value));
    ops.M_lumped[i] = value;
  }
  return ops;
}

}  // namespace steklov
