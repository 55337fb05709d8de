#pragma once

#include <steklov/types.hpp>

#include <iosfwd>
#include <vector>

namespace steklov {

// Indexed triangle surface. Triangles are wound counter-clockwise seen from
// outside; normals and areas are derived from the winding and kept in sync by
// make_mesh. Instances are treated as immutable after construction.
struct TriangleMesh {
  Points vertices;  // one row per vertex
  Faces triangles;  // one row per triangle, indices into vertices
  Points normals;   // per-triangle unit normal (zero for degenerate triangles)
  Vector areas;     // per-triangle area
  bool oriented = false;  // closed with consistent winding and positive volume

  Index num_vertices() const { return vertices.rows(); }
  Index num_triangles() const { return triangles.rows(); }
  Vec3 vertex(Index v) const { return vertices.row(v).transpose(); }
  Vec3 corner(Index t, int c) const { return vertices.row(triangles(t, c)).transpose(); }
  Vec3 normal(Index t) const { return normals.row(t).transpose(); }
  Vec3 centroid(Index t) const;
};

// Builds derived quantities and validates indices. Closed meshes with a
// consistent winding are re-wound so the signed volume is nonnegative.
TriangleMesh make_mesh(Points vertices, Faces triangles);

struct MeshStats {
  double surface_area = 0;
  double enclosed_volume = 0;
  double mean_edge_length = 0;
  double isoperimetric_scale = 0;  // Area / Vol^(1/3); 0 when volume <= 0
};

double surface_area(const TriangleMesh& mesh);
double enclosed_volume(const TriangleMesh& mesh);
double mean_edge_length(const TriangleMesh& mesh);
double isoperimetric_scale(const TriangleMesh& mesh);  // throws DegenerateVolume
MeshStats mesh_stats(const TriangleMesh& mesh);

// True when every undirected edge is used by exactly two triangles.
bool is_closed(const TriangleMesh& mesh);

// Connected component id per vertex (components of the triangle graph).
std::vector<int> vertex_components(const TriangleMesh& mesh);

// Merges vertices closer than merge_tolerance_factor * mean edge length,
// drops degenerate and duplicated triangles, and compacts unreferenced
// vertices. Idempotent on its own output.
TriangleMesh repair_mesh(const TriangleMesh& mesh, double merge_tolerance_factor = 1e-2);

// Displaces each vertex by a uniform random vector of norm at most
// amplitude * mean edge length. Deterministic for a fixed seed.
TriangleMesh perturb_mesh(const TriangleMesh& mesh, double amplitude, std::uint64_t seed);

// Removes floor(fraction * #triangles) triangles uniformly at random,
// keeping all vertices. Deterministic for a fixed seed.
TriangleMesh remove_random_triangles(const TriangleMesh& mesh, double fraction, std::uint64_t seed);

// Keeps only vertices referenced by at least one triangle.
TriangleMesh compact_vertices(const TriangleMesh& mesh);

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                         const Vec3& translation, double scale = 1.0);

// FNV-1a over vertex coordinates and triangle indices.
std::uint64_t mesh_checksum(const TriangleMesh& mesh);

// Linear tetrahedral mesh with a boundary/interior vertex partition.
struct TetMesh {
  Points vertices;
  Cells tets;
  std::vector<Index> boundary_vertices;  // ascending
  std::vector<Index> interior_vertices;  // ascending
  Faces boundary_faces;                  // outward-oriented, global indices

  Index num_vertices() const { return vertices.rows(); }
  Index num_tets() const { return tets.rows(); }
};

// Derives the boundary partition (faces used by exactly one tet) and checks
// that all tets have positive signed volume.
TetMesh make_tet_mesh(Points vertices, Cells tets);

// Boundary surface as a TriangleMesh over boundary-local vertex numbering;
// local vertex i corresponds to tet.boundary_vertices[i].
TriangleMesh boundary_mesh(const TetMesh& tet);

}  // namespace steklov
