#include <steklov/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace steklov {

namespace {

Vec3 triangle_cross(const Points& vertices, const Faces& triangles, Index t) {
  const Vec3 a = vertices.row(triangles(t, 0)).transpose();
  const Vec3 b = vertices.row(triangles(t, 1)).transpose();
  const Vec3 c = vertices.row(triangles(t, 2)).transpose();
  return (b - a).cross(c - a);
}

void compute_normals_areas(TriangleMesh& mesh) {
  const Index m = mesh.num_triangles();
  mesh.normals.resize(m, 3);
  mesh.areas.resize(m);
  for (Index t = 0; t < m; ++t) {
    const Vec3 cr = triangle_cross(mesh.vertices, mesh.triangles, t);
    const double len = cr.norm();
    mesh.areas[t] = 0.5 * len;
    if (len > 0) {
      mesh.normals.row(t) = (cr / len).transpose();
    } else {
      mesh.normals.row(t).setZero();
    }
  }
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

// Flips windings over the adjacency graph until neighbouring triangles agree,
// then flips everything if the signed volume came out negative. Leaves
// non-manifold or open meshes untouched.
void normalize_orientation(TriangleMesh& mesh) {
  const Index m = mesh.num_triangles();
  if (m == 0) return;

  std::unordered_map<std::uint64_t, std::vector<Index>> edge_tris;
  edge_tris.reserve(static_cast<std::size_t>(m) * 3);
  for (Index t = 0; t < m; ++t) {
    for (int c = 0; c < 3; ++c) {
      edge_tris[edge_key(mesh.triangles(t, c), mesh.triangles(t, (c + 1) % 3))].push_back(t);
    }
  }
  for (const auto& [key, tris] : edge_tris) {
    (void)key;
    if (tris.size() != 2) return;  // open or non-manifold: nothing to normalize
  }

  // Directed edge (a->b) of a triangle must appear as (b->a) in its neighbour.
  std::vector<int> flip(m, -1);
  for (Index seed = 0; seed < m; ++seed) {
    if (flip[seed] != -1) continue;
    flip[seed] = 0;
    std::queue<Index> queue;
    queue.push(seed);
    while (!queue.empty()) {
      const Index t = queue.front();
      queue.pop();
      for (int c = 0; c < 3; ++c) {
        int a = mesh.triangles(t, c), b = mesh.triangles(t, (c + 1) % 3);
        if (flip[t]) std::swap(a, b);
        for (Index other : edge_tris[edge_key(a, b)]) {
          if (other == t) continue;
          bool same_direction = false;
          for (int d = 0; d < 3; ++d) {
            if (mesh.triangles(other, d) == a && mesh.triangles(other, (d + 1) % 3) == b) {
              same_direction = true;
            }
          }
          const int wanted = same_direction ? 1 - flip[t] : flip[t];
          if (flip[other] == -1) {
            flip[other] = wanted;
            queue.push(other);
          } else if (flip[other] != wanted) {
            return;  // unorientable
          }
        }
      }
    }
  }
  for (Index t = 0; t < m; ++t) {
    if (flip[t]) std::swap(mesh.triangles(t, 1), mesh.triangles(t, 2));
  }
  if (enclosed_volume(mesh) < 0) {
    for (Index t = 0; t < m; ++t) std::swap(mesh.triangles(t, 1), mesh.triangles(t, 2));
  }
  mesh.oriented = true;
}

}  // namespace

Vec3 TriangleMesh::centroid(Index t) const {
  return (corner(t, 0) + corner(t, 1) + corner(t, 2)) / 3.0;
}

TriangleMesh make_mesh(Points vertices, Faces triangles) {
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const Index n = mesh.num_vertices();
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int v = mesh.triangles(t, c);
      if (v < 0 || v >= n) {
        throw IndexError("triangle " + std::to_string(t) + " references vertex " +
                         std::to_string(v) + " of " + std::to_string(n));
      }
    }
  }
  normalize_orientation(mesh);
  compute_normals_areas(mesh);
  return mesh;
}

double surface_area(const TriangleMesh& mesh) { return mesh.areas.sum(); }

double enclosed_volume(const TriangleMesh& mesh) {
  // (1/3) \int x . n dGamma, exact for polyhedra and stable on triangle soup.
  double volume = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    volume += (a + b + c).dot((b - a).cross(c - a));
  }
  return volume / 18.0;
}

double mean_edge_length(const TriangleMesh& mesh) {
  std::unordered_set<std::uint64_t> seen;
  double total = 0;
  std::size_t count = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c), b = mesh.triangles(t, (c + 1) % 3);
      if (a == b) continue;
      if (seen.insert(edge_key(a, b)).second) {
        total += (mesh.vertex(a) - mesh.vertex(b)).norm();
        ++count;
      }
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

double isoperimetric_scale(const TriangleMesh& mesh) {
  const double volume = enclosed_volume(mesh);
  if (volume <= 0) throw DegenerateVolume("isoperimetric scale needs positive enclosed volume");
  return surface_area(mesh) / std::cbrt(volume);
}

MeshStats mesh_stats(const TriangleMesh& mesh) {
  MeshStats stats;
  stats.surface_area = surface_area(mesh);
  stats.enclosed_volume = enclosed_volume(mesh);
  stats.mean_edge_length = mean_edge_length(mesh);
  stats.isoperimetric_scale =
      stats.enclosed_volume > 0 ? stats.surface_area / std::cbrt(stats.enclosed_volume) : 0.0;
  return stats;
}

bool is_closed(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> uses;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      ++uses[edge_key(mesh.triangles(t, c), mesh.triangles(t, (c + 1) % 3))];
    }
  }
  if (uses.empty()) return false;
  return std::all_of(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 2; });
}

std::vector<int> vertex_components(const TriangleMesh& mesh) {
  const Index n = mesh.num_vertices();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const int a = find(mesh.triangles(t, 0));
    const int b = find(mesh.triangles(t, 1));
    const int c = find(mesh.triangles(t, 2));
    parent[b] = a;
    parent[c] = a;
  }
  std::vector<int> label(n, -1);
  int next = 0;
  std::vector<int> result(n);
  for (Index v = 0; v < n; ++v) {
    const int root = find(static_cast<int>(v));
    if (label[root] == -1) label[root] = next++;
    result[v] = label[root];
  }
  return result;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

TriangleMesh repair_mesh(const TriangleMesh& mesh, double merge_tolerance_factor) {
  const Index n = mesh.num_vertices();
  const double delta = merge_tolerance_factor * mean_edge_length(mesh);

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  auto unite = [&](int a, int b) { parent[find(b)] = find(a); };

  if (delta > 0) {
    // Hash grid with cell size delta; candidates live in the 27 neighbour cells.
    std::unordered_map<CellKey, std::vector<Index>, CellHash> grid;
    auto cell_of = [&](const Vec3& p) {
      return CellKey{static_cast<std::int64_t>(std::floor(p.x() / delta)),
                     static_cast<std::int64_t>(std::floor(p.y() / delta)),
                     static_cast<std::int64_t>(std::floor(p.z() / delta))};
    };
    for (Index v = 0; v < n; ++v) grid[cell_of(mesh.vertex(v))].push_back(v);
    for (Index v = 0; v < n; ++v) {
      const Vec3 p = mesh.vertex(v);
      const CellKey base = cell_of(p);
      for (std::int64_t dx = -1; dx <= 1; ++dx)
        for (std::int64_t dy = -1; dy <= 1; ++dy)
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            const auto it = grid.find(CellKey{base.x + dx, base.y + dy, base.z + dz});
            if (it == grid.end()) continue;
            for (Index w : it->second) {
              if (w <= v) continue;
              if ((mesh.vertex(w) - p).norm() <= delta) {
                unite(static_cast<int>(v), static_cast<int>(w));
              }
            }
          }
    }
  } else {
    // delta == 0 still merges exactly coincident vertices.
    std::map<std::array<double, 3>, int> exact;
    for (Index v = 0; v < n; ++v) {
      const std::array<double, 3> key{mesh.vertices(v, 0), mesh.vertices(v, 1), mesh.vertices(v, 2)};
      auto [it, inserted] = exact.try_emplace(key, static_cast<int>(v));
      if (!inserted) unite(it->second, static_cast<int>(v));
    }
  }

  // Representative position = mean over each merged cluster.
  std::vector<int> cluster(n, -1);
  std::vector<Vec3> position;
  std::vector<int> size;
  for (Index v = 0; v < n; ++v) {
    const int root = find(static_cast<int>(v));
    if (cluster[root] == -1) {
      cluster[root] = static_cast<int>(position.size());
      position.push_back(Vec3::Zero());
      size.push_back(0);
    }
    cluster[v] = cluster[root];
    position[cluster[v]] += mesh.vertex(v);
    ++size[cluster[v]];
  }
  for (std::size_t c = 0; c < position.size(); ++c) position[c] /= size[c];

  std::vector<std::array<int, 3>> faces;
  std::unordered_set<std::uint64_t> seen_faces;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    std::array<int, 3> f = {cluster[mesh.triangles(t, 0)], cluster[mesh.triangles(t, 1)],
                            cluster[mesh.triangles(t, 2)]};
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
    std::array<int, 3> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    const std::uint64_t key = (static_cast<std::uint64_t>(sorted[0]) << 42) ^
                              (static_cast<std::uint64_t>(sorted[1]) << 21) ^
                              static_cast<std::uint64_t>(sorted[2]);
    if (!seen_faces.insert(key).second) continue;
    const Vec3 cr = (position[f[1]] - position[f[0]]).cross(position[f[2]] - position[f[0]]);
    if (0.5 * cr.norm() <= 0) continue;
    faces.push_back(f);
  }
  if (faces.empty()) throw EmptyMesh("repair removed every triangle");

  Points vertices(static_cast<Index>(position.size()), 3);
  for (std::size_t c = 0; c < position.size(); ++c) vertices.row(static_cast<Index>(c)) = position[c];
  Faces triangles(static_cast<Index>(faces.size()), 3);
  for (std::size_t t = 0; t < faces.size(); ++t) {
    triangles.row(static_cast<Index>(t)) << faces[t][0], faces[t][1], faces[t][2];
  }
  return compact_vertices(make_mesh(std::move(vertices), std::move(triangles)));
}

TriangleMesh perturb_mesh(const TriangleMesh& mesh, double amplitude, std::uint64_t seed) {
  if (amplitude < 0) throw Error("perturb_mesh: amplitude must be nonnegative");
  const double radius = amplitude * mean_edge_length(mesh);
  Points vertices = mesh.vertices;
  if (radius > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Index v = 0; v < vertices.rows(); ++v) {
      Vec3 d;
      do {
        d = Vec3(unit(rng), unit(rng), unit(rng));
      } while (d.squaredNorm() > 1.0);
      vertices.row(v) += (radius * d).transpose();
    }
  }
  TriangleMesh out;
  out.vertices = std::move(vertices);
  out.triangles = mesh.triangles;
  out.oriented = false;
  compute_normals_areas(out);
  return out;
}

TriangleMesh remove_random_triangles(const TriangleMesh& mesh, double fraction, std::uint64_t seed) {
  if (fraction < 0 || fraction >= 1) throw Error("remove_random_triangles: fraction must be in [0,1)");
  const Index m = mesh.num_triangles();
  const Index remove = static_cast<Index>(std::floor(fraction * static_cast<double>(m)));
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> drop(m, false);
  for (Index i = 0; i < remove; ++i) drop[order[i]] = true;

  Faces triangles(m - remove, 3);
  Index out = 0;
  for (Index t = 0; t < m; ++t) {
    if (!drop[t]) triangles.row(out++) = mesh.triangles.row(t);
  }
  TriangleMesh result;
  result.vertices = mesh.vertices;
  result.triangles = std::move(triangles);
  result.oriented = false;
  compute_normals_areas(result);
  return result;
}

TriangleMesh compact_vertices(const TriangleMesh& mesh) {
  const Index n = mesh.num_vertices();
  std::vector<Index> remap(n, -1);
  Index next = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      Index& slot = remap[mesh.triangles(t, c)];
      if (slot == -1) slot = next++;
    }
  }
  Points vertices(next, 3);
  for (Index v = 0; v < n; ++v) {
    if (remap[v] != -1) vertices.row(remap[v]) = mesh.vertices.row(v);
  }
  Faces triangles(mesh.num_triangles(), 3);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      triangles(t, c) = static_cast<int>(remap[mesh.triangles(t, c)]);
    }
  }
  return make_mesh(std::move(vertices), std::move(triangles));
}

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Vec3& translation, double scale) {
  Points vertices(mesh.num_vertices(), 3);
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    vertices.row(v) = (scale * (rotation * mesh.vertex(v)) + translation).transpose();
  }
  return make_mesh(std::move(vertices), mesh.triangles);
}

std::uint64_t mesh_checksum(const TriangleMesh& mesh) {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    for (int d = 0; d < 3; ++d) {
      const double value = mesh.vertices(v, d);
      feed(&value, sizeof(value));
    }
  }
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const std::int32_t value = mesh.triangles(t, c);
      feed(&value, sizeof(value));
    }
  }
  return h;
}

namespace {

double tet_signed_volume(const Points& vertices, const Cells& tets, Index t) {
  const Vec3 a = vertices.row(tets(t, 0)).transpose();
  const Vec3 b = vertices.row(tets(t, 1)).transpose();
  const Vec3 c = vertices.row(tets(t, 2)).transpose();
  const Vec3 d = vertices.row(tets(t, 3)).transpose();
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

}  // namespace

TetMesh make_tet_mesh(Points vertices, Cells tets) {
  TetMesh tet;
  tet.vertices = std::move(vertices);
  tet.tets = std::move(tets);
  const Index n = tet.num_vertices();
  for (Index t = 0; t < tet.num_tets(); ++t) {
    for (int c = 0; c < 4; ++c) {
      const int v = tet.tets(t, c);
      if (v < 0 || v >= n) throw IndexError("tet references out-of-range vertex");
    }
    if (tet_signed_volume(tet.vertices, tet.tets, t) <= 0) {
      throw InvertedTet("tet " + std::to_string(t) + " has nonpositive volume");
    }
  }

  // Faces of a positively oriented tet, wound outward.
  static constexpr int kFace[4][3] = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> faces;  // sorted -> (count, oriented)
  for (Index t = 0; t < tet.num_tets(); ++t) {
    for (const auto& f : kFace) {
      std::array<int, 3> oriented = {tet.tets(t, f[0]), tet.tets(t, f[1]), tet.tets(t, f[2])};
      std::array<int, 3> key = oriented;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.try_emplace(key, std::pair{0, oriented});
      it->second.first += 1;
      (void)inserted;
    }
  }
  std::vector<std::array<int, 3>> boundary;
  std::vector<bool> on_boundary(n, false);
  for (const auto& [key, value] : faces) {
    (void)key;
    if (value.first == 1) {
      boundary.push_back(value.second);
      for (int v : value.second) on_boundary[v] = true;
    }
  }
  tet.boundary_faces.resize(static_cast<Index>(boundary.size()), 3);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    tet.boundary_faces.row(static_cast<Index>(i)) << boundary[i][0], boundary[i][1], boundary[i][2];
  }
  for (Index v = 0; v < n; ++v) {
    (on_boundary[v] ? tet.boundary_vertices : tet.interior_vertices).push_back(v);
  }
  return tet;
}

TriangleMesh boundary_mesh(const TetMesh& tet) {
  std::vector<Index> to_local(tet.num_vertices(), -1);
  for (std::size_t i = 0; i < tet.boundary_vertices.size(); ++i) {
    to_local[tet.boundary_vertices[i]] = static_cast<Index>(i);
  }
  Points vertices(static_cast<Index>(tet.boundary_vertices.size()), 3);
  for (std::size_t i = 0; i < tet.boundary_vertices.size(); ++i) {
    vertices.row(static_cast<Index>(i)) = tet.vertices.row(tet.boundary_vertices[i]);
  }
  Faces triangles(tet.boundary_faces.rows(), 3);
  for (Index t = 0; t < tet.boundary_faces.rows(); ++t) {
    for (int c = 0; c < 3; ++c) {
      triangles(t, c) = static_cast<int>(to_local[tet.boundary_faces(t, c)]);
    }
  }
  return make_mesh(std::move(vertices), std::move(triangles));
}

}  // namespace steklov
