#pragma once

#include <steklov/mesh.hpp>
#include <steklov/operators.hpp>

#include <cstdint>

namespace steklov::fixtures {

// Unit icosphere: level 0 is the icosahedron (12 vertices), each level
// quadruples the triangle count. Level 3 has 642 vertices / 1280 triangles.
TriangleMesh icosphere(int level);

// Unit sphere from octahedron subdivision; level 3 has 258 vertices / 512
// triangles, level 4 has 1026 / 2048.
TriangleMesh octasphere(int level);

// Axis-aligned cube [0,1]^3 with each face split into an m x m quad grid.
TriangleMesh cube(int grid = 1);

// Box [0,lx]x[0,ly]x[0,lz] with per-face grids proportional to edge lengths.
TriangleMesh box(double lx, double ly, double lz, int grid_per_unit);

// Closed pancake: radius, thickness, `rings` radial rings, `slices` angular.
TriangleMesh disk(double radius, double thickness, int rings = 7, int slices = 36);

// Cube of edge 1 with a radial bump of the given height on the +z face;
// height < 0 pushes the bump inward. The two signs give intrinsically
// isometric surfaces.
TriangleMesh bump_cube(double height, int grid = 10);

// Open rectangular sheet in the xy plane, nx x ny quads.
TriangleMesh sheet(double lx, double ly, int nx, int ny);

// Sheet folded by `angle` radians about the line x = crease.
TriangleMesh folded_sheet(double lx, double ly, int nx, int ny, double crease, double angle);

// Two unit icospheres, the second translated by `offset`.
TriangleMesh two_spheres(int level, const Vec3& offset);

// Part of the unit icosphere with all triangle vertices at z <= cut.
TriangleMesh cut_sphere(int level, double cut);

// Horseshoe: a long box bent around a cylinder so its two ends almost meet.
TriangleMesh horseshoe(int grid = 2);

// Ball tet mesh built from `layers` concentric copies of the level-`level`
// icosphere plus the center; prisms split into tets with grid-consistent
// diagonals.
TetMesh ball_tets(int level, int layers);

// Assemble with a checksum-keyed binary cache under cache_dir (created on
// demand); reuses dumps across test binaries.
OperatorSet assemble_cached(const TriangleMesh& mesh, const AssemblyOptions& options = {},
                            const std::string& cache_dir = "op_cache");

}  // namespace steklov::fixtures
