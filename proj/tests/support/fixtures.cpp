#include "fixtures.hpp"

#include <steklov/mesh_io.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <vector>

namespace steklov::fixtures {

namespace {

struct MeshBuilder {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::map<std::array<long long, 3>, int> dedup;

  int add(const Vec3& p, double snap = 1e-9) {
    const std::array<long long, 3> key = {static_cast<long long>(std::llround(p.x() / snap)),
                                          static_cast<long long>(std::llround(p.y() / snap)),
                                          static_cast<long long>(std::llround(p.z() / snap))};
    auto [it, inserted] = dedup.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(p);
    return it->second;
  }
  void face(int a, int b, int c) { faces.push_back({a, b, c}); }

  TriangleMesh build() const {
    Points vs(static_cast<Index>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) vs.row(static_cast<Index>(i)) = vertices[i];
    Faces fs(static_cast<Index>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i) {
      fs.row(static_cast<Index>(i)) << faces[i][0], faces[i][1], faces[i][2];
    }
    return make_mesh(std::move(vs), std::move(fs));
  }
};

}  // namespace

TriangleMesh icosphere(int level) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it == midpoints.end()) {
        Vec3 m = (verts[a] + verts[b]).normalized();
        it = midpoints.emplace(key, static_cast<int>(verts.size())).first;
        verts.push_back(m);
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Points vs(static_cast<Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) vs.row(static_cast<Index>(i)) = verts[i];
  Faces fs(static_cast<Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    fs.row(static_cast<Index>(i)) << faces[i][0], faces[i][1], faces[i][2];
  }
  return make_mesh(std::move(vs), std::move(fs));
}

TriangleMesh octasphere(int level) {
  std::vector<Vec3> verts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::array<int, 3>> faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                           {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it == midpoints.end()) {
        it = midpoints.emplace(key, static_cast<int>(verts.size())).first;
        verts.push_back((verts[a] + verts[b]).normalized());
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Points vs(static_cast<Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) vs.row(static_cast<Index>(i)) = verts[i];
  Faces fs(static_cast<Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    fs.row(static_cast<Index>(i)) << faces[i][0], faces[i][1], faces[i][2];
  }
  return make_mesh(std::move(vs), std::move(fs));
}

namespace {

// Adds one grid face of a box; u, v span the face, origin at `corner`,
// outward normal = u x v direction.
void add_grid_face(MeshBuilder& mb, const Vec3& corner, const Vec3& u, const Vec3& v, int nu,
                   int nv) {
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const Vec3 p00 = corner + u * (static_cast<double>(i) / nu) + v * (static_cast<double>(j) / nv);
      const Vec3 p10 = corner + u * (static_cast<double>(i + 1) / nu) + v * (static_cast<double>(j) / nv);
      const Vec3 p01 = corner + u * (static_cast<double>(i) / nu) + v * (static_cast<double>(j + 1) / nv);
      const Vec3 p11 = corner + u * (static_cast<double>(i + 1) / nu) + v * (static_cast<double>(j + 1) / nv);
      const int a = mb.add(p00), b = mb.add(p10), c = mb.add(p11), d = mb.add(p01);
      mb.face(a, b, c);
      mb.face(a, c, d);
    }
  }
}

TriangleMesh box_mesh(double lx, double ly, double lz, int nx, int ny, int nz) {
  MeshBuilder mb;
  const Vec3 ex(lx, 0, 0), ey(0, ly, 0), ez(0, 0, lz);
  const Vec3 o(0, 0, 0);
  add_grid_face(mb, o, ey, ex, ny, nx);            // z = 0, normal -z
  add_grid_face(mb, ez, ex, ey, nx, ny);           // z = lz, normal +z
  add_grid_face(mb, o, ex, ez, nx, nz);            // y = 0, normal -y
  add_grid_face(mb, ey, ez, ex, nz, nx);           // y = ly, normal +y
  add_grid_face(mb, o, ez, ey, nz, ny);            // x = 0, normal -x
  add_grid_face(mb, ex, ey, ez, ny, nz);           // x = lx, normal +x
  return mb.build();
}

}  // namespace

TriangleMesh cube(int grid) { return box_mesh(1, 1, 1, grid, grid, grid); }

TriangleMesh box(double lx, double ly, double lz, int grid_per_unit) {
  auto cells = [grid_per_unit](double l) {
    return std::max(1, static_cast<int>(std::lround(l * grid_per_unit)));
  };
  return box_mesh(lx, ly, lz, cells(lx), cells(ly), cells(lz));
}

TriangleMesh disk(double radius, double thickness, int rings, int slices) {
  MeshBuilder mb;
  const double half = 0.5 * thickness;
  auto ring_point = [&](int k, int s, double z) {
    const double r = radius * k / rings;
    const double a = 2.0 * M_PI * s / slices;
    return Vec3(r * std::cos(a), r * std::sin(a), z);
  };
  for (double z : {half, -half}) {
    const bool top = z > 0;
    const int center = mb.add(Vec3(0, 0, z));
    for (int s = 0; s < slices; ++s) {
      const int a = mb.add(ring_point(1, s, z));
      const int b = mb.add(ring_point(1, (s + 1) % slices, z));
      if (top) {
        mb.face(center, a, b);
      } else {
        mb.face(center, b, a);
      }
    }
    for (int k = 1; k < rings; ++k) {
      for (int s = 0; s < slices; ++s) {
        const int s1 = (s + 1) % slices;
        const int a = mb.add(ring_point(k, s, z)), b = mb.add(ring_point(k, s1, z));
        const int c = mb.add(ring_point(k + 1, s1, z)), d = mb.add(ring_point(k + 1, s, z));
        if (top) {
          mb.face(a, c, b);
          mb.face(a, d, c);
        } else {
          mb.face(a, b, c);
          mb.face(a, c, d);
        }
      }
    }
  }
  for (int s = 0; s < slices; ++s) {  // side band
    const int s1 = (s + 1) % slices;
    const int a = mb.add(ring_point(rings, s, half)), b = mb.add(ring_point(rings, s1, half));
    const int c = mb.add(ring_point(rings, s1, -half)), d = mb.add(ring_point(rings, s, -half));
    mb.face(a, b, c);
    mb.face(a, c, d);
  }
  return mb.build();
}

TriangleMesh bump_cube(double height, int grid) {
  TriangleMesh base = cube(grid);
  Points vertices = base.vertices;
  const Vec3 center(0.5, 0.5, 1.0);
  const double r0 = 0.35;
  for (Index v = 0; v < vertices.rows(); ++v) {
    if (std::abs(vertices(v, 2) - 1.0) > 1e-12) continue;
    const double r = std::hypot(vertices(v, 0) - center.x(), vertices(v, 1) - center.y());
    if (r >= r0) continue;
    const double c = std::cos(0.5 * M_PI * r / r0);
    vertices(v, 2) += height * c * c;
  }
  return make_mesh(std::move(vertices), base.triangles);
}

TriangleMesh sheet(double lx, double ly, int nx, int ny) {
  MeshBuilder mb;
  add_grid_face(mb, Vec3(0, 0, 0), Vec3(lx, 0, 0), Vec3(0, ly, 0), nx, ny);
  return mb.build();
}

TriangleMesh folded_sheet(double lx, double ly, int nx, int ny, double crease, double angle) {
  TriangleMesh flat = sheet(lx, ly, nx, ny);
  Points vertices = flat.vertices;
  for (Index v = 0; v < vertices.rows(); ++v) {
    const double x = vertices(v, 0);
    if (x <= crease) continue;
    const double d = x - crease;
    vertices(v, 0) = crease + d * std::cos(angle);
    vertices(v, 2) = d * std::sin(angle);
  }
  return make_mesh(std::move(vertices), flat.triangles);
}

TriangleMesh two_spheres(int level, const Vec3& offset) {
  const TriangleMesh one = icosphere(level);
  const Index n = one.num_vertices();
  Points vertices(2 * n, 3);
  vertices.topRows(n) = one.vertices;
  vertices.bottomRows(n) = one.vertices.rowwise() + offset.transpose();
  Faces triangles(2 * one.num_triangles(), 3);
  triangles.topRows(one.num_triangles()) = one.triangles;
  triangles.bottomRows(one.num_triangles()) = one.triangles.array() + static_cast<int>(n);
  return make_mesh(std::move(vertices), std::move(triangles));
}

TriangleMesh cut_sphere(int level, double cut) {
  const TriangleMesh sphere = icosphere(level);
  std::vector<Index> keep;
  for (Index t = 0; t < sphere.num_triangles(); ++t) {
    bool inside = true;
    for (int c = 0; c < 3; ++c) inside &= sphere.corner(t, c).z() <= cut;
    if (inside) keep.push_back(t);
  }
  Faces triangles(static_cast<Index>(keep.size()), 3);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    triangles.row(static_cast<Index>(i)) = sphere.triangles.row(keep[i]);
  }
  TriangleMesh out;
  out.vertices = sphere.vertices;
  out.triangles = std::move(triangles);
  return compact_vertices(make_mesh(std::move(out.vertices), std::move(out.triangles)));
}

TriangleMesh horseshoe(int grid) {
  const double length = 8.0, width = 1.0, heightz = 1.0;
  TriangleMesh straight = box(length, width, heightz, grid);
  const double theta_total = 1.7 * M_PI;
  const double bend_radius = length / theta_total;
  Points vertices = straight.vertices;
  for (Index v = 0; v < vertices.rows(); ++v) {
    const double theta = vertices(v, 0) / length * theta_total;
    const double r = bend_radius + vertices(v, 1);
    vertices(v, 0) = r * std::cos(theta);
    vertices(v, 1) = r * std::sin(theta);
  }
  return make_mesh(std::move(vertices), straight.triangles);
}

TetMesh ball_tets(int level, int layers) {
  const TriangleMesh sphere = icosphere(level);
  const Index n = sphere.num_vertices();
  Points vertices(1 + layers * n, 3);
  vertices.row(0).setZero();
  for (int k = 1; k <= layers; ++k) {
    const double r = static_cast<double>(k) / layers;
    vertices.middleRows(1 + (k - 1) * n, n) = sphere.vertices * r;
  }
  auto layer_id = [n](int k, int i) { return 1 + (k - 1) * static_cast<int>(n) + i; };

  std::vector<std::array<int, 4>> tets;
  auto add_tet = [&](int a, int b, int c, int d) {
    const Vec3 pa = vertices.row(a).transpose(), pb = vertices.row(b).transpose(),
               pc = vertices.row(c).transpose(), pd = vertices.row(d).transpose();
    const double vol = (pb - pa).cross(pc - pa).dot(pd - pa);
    if (vol < 0) {
      tets.push_back({a, b, d, c});
    } else {
      tets.push_back({a, b, c, d});
    }
  };

  for (Index t = 0; t < sphere.num_triangles(); ++t) {
    const int i0 = sphere.triangles(t, 0), i1 = sphere.triangles(t, 1), i2 = sphere.triangles(t, 2);
    add_tet(0, layer_id(1, i0), layer_id(1, i1), layer_id(1, i2));
    for (int k = 1; k < layers; ++k) {
      // Rotate so the smallest surface index leads; quad diagonals then all
      // emanate from the smallest vertex of each quad, which is consistent
      // between neighbouring prisms.
      int s[3] = {i0, i1, i2};
      while (!(s[0] < s[1] && s[0] < s[2])) {
        const int tmp = s[0];
        s[0] = s[1];
        s[1] = s[2];
        s[2] = tmp;
      }
      const int b0 = layer_id(k, s[0]), b1 = layer_id(k, s[1]), b2 = layer_id(k, s[2]);
      const int t0 = layer_id(k + 1, s[0]), t1 = layer_id(k + 1, s[1]), t2 = layer_id(k + 1, s[2]);
      if (s[1] < s[2]) {
        add_tet(b0, b1, b2, t2);
        add_tet(b0, b1, t2, t1);
        add_tet(b0, t0, t1, t2);
      } else {
        add_tet(b0, b1, b2, t1);
        add_tet(b0, b2, t2, t1);
        add_tet(b0, t0, t1, t2);
      }
    }
  }
  Cells cells(static_cast<Index>(tets.size()), 4);
  for (std::size_t i = 0; i < tets.size(); ++i) {
    cells.row(static_cast<Index>(i)) << tets[i][0], tets[i][1], tets[i][2], tets[i][3];
  }
  return make_tet_mesh(std::move(vertices), std::move(cells));
}

OperatorSet assemble_cached(const TriangleMesh& mesh, const AssemblyOptions& options,
                            const std::string& cache_dir) {
  std::ostringstream name;
  name << std::hex << mesh_checksum(mesh) << "_" << options.quadrature.regular_degree << "_"
       << options.quadrature.near_degree << "_" << options.quadrature.singular_points << "_"
       << options.quadrature.epsilon << ".ops";
  const std::filesystem::path path = std::filesystem::path(cache_dir) / name.str();
  if (std::filesystem::exists(path)) {
    try {
      return load_operators(path.string());
    } catch (const Error&) {
      // fall through to reassembly
    }
  }
  OperatorSet ops = assemble(mesh, options);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (!ec) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    try {
      save_operators(ops, tmp.string());
      std::filesystem::rename(tmp, path, ec);
    } catch (const Error&) {
    }
  }
  return ops;
}

}  // namespace steklov::fixtures
