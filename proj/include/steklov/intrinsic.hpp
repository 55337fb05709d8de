#pragma once

#include <steklov/mesh.hpp>
#include <steklov/types.hpp>

#include <vector>

namespace steklov {

// Cotangent Laplace-Beltrami stiffness (PSD sign convention, L 1 = 0) and the
// surface Galerkin mass.
struct SurfaceLaplacian {
  SparseMatrix L;
  SparseMatrix M;
};

SurfaceLaplacian cotan_laplacian(const TriangleMesh& mesh);

// Linear-element volumetric stiffness and consistent mass on a tet mesh.
struct VolumetricLaplacian {
  SparseMatrix L;
  SparseMatrix M;
};

VolumetricLaplacian fem_volumetric_laplacian(const TetMesh& tet);

// FEM Dirichlet-to-Neumann operator: Schur complement of the volumetric
// stiffness onto the boundary vertices,
//   S = L_bb - L_bi L_ii^{-1} L_ib,
// with rows ordered like tet.boundary_vertices. The boundary mass is the
// surface Galerkin mass of the boundary triangulation in the same ordering.
struct FemDtn {
  Matrix S;
  SparseMatrix boundary_mass;
  Vector boundary_mass_lumped;
  TriangleMesh boundary;                  // boundary-local surface mesh
  std::vector<Index> boundary_vertices;   // global id per local row
};

FemDtn fem_dtn_schur(const TetMesh& tet);

}  // namespace steklov
