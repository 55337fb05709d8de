#include <steklov/intrinsic.hpp>

#include <steklov/operators.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <map>
#include <vector>

namespace steklov {

SurfaceLaplacian cotan_laplacian(const TriangleMesh& mesh) {
  const Index n = mesh.num_vertices();

  std::map<std::pair<int, int>, int> edge_uses;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c), b = mesh.triangles(t, (c + 1) % 3);
      ++edge_uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [edge, uses] : edge_uses) {
    if (uses > 2) {
      throw NonManifoldEdge("edge (" + std::to_string(edge.first) + "," +
                            std::to_string(edge.second) + ") used by " + std::to_string(uses) +
                            " triangles");
    }
  }

  // w_ij = (cot alpha + cot beta) / 2 over the angles opposite edge (i,j).
  std::map<std::pair<int, int>, double> weights;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int i = mesh.triangles(t, (c + 1) % 3);
      const int j = mesh.triangles(t, (c + 2) % 3);
      const Vec3 apex = mesh.corner(t, c);
      const Vec3 u = mesh.vertex(i) - apex;
      const Vec3 v = mesh.vertex(j) - apex;
      const double cotangent = u.dot(v) / u.cross(v).norm();
      weights[{std::min(i, j), std::max(i, j)}] += 0.5 * cotangent;
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(weights.size() * 4);
  Vector diagonal = Vector::Zero(n);
  for (const auto& [edge, w] : weights) {
    triplets.emplace_back(edge.first, edge.second, -w);
    triplets.emplace_back(edge.second, edge.first, -w);
    diagonal[edge.first] += w;
    diagonal[edge.second] += w;
  }
  for (Index v = 0; v < n; ++v) triplets.emplace_back(v, v, diagonal[v]);

  SurfaceLaplacian result;
  result.L.resize(n, n);
  result.L.setFromTriplets(triplets.begin(), triplets.end());
  result.M = galerkin_mass(mesh);
  return result;
}

VolumetricLaplacian fem_volumetric_laplacian(const TetMesh& tet) {
  const Index n = tet.num_vertices();
  std::vector<Eigen::Triplet<double>> stiffness;
  std::vector<Eigen::Triplet<double>> mass;
  stiffness.reserve(static_cast<std::size_t>(tet.num_tets()) * 16);
  mass.reserve(static_cast<std::size_t>(tet.num_tets()) * 16);

  for (Index t = 0; t < tet.num_tets(); ++t) {
    const int ids[4] = {tet.tets(t, 0), tet.tets(t, 1), tet.tets(t, 2), tet.tets(t, 3)};
    const Vec3 p0 = tet.vertices.row(ids[0]).transpose();
    Eigen::Matrix3d d;
    for (int c = 0; c < 3; ++c) {
      d.col(c) = tet.vertices.row(ids[c + 1]).transpose() - p0;
    }
    const double volume = d.determinant() / 6.0;
    if (volume <= 0) throw InvertedTet("tet " + std::to_string(t) + " has nonpositive volume");
    // Rows of D^{-T} are the gradients of the last three barycentrics.
    const Eigen::Matrix3d grad_t = d.inverse();
    Vec3 grad[4];
    grad[0] = -(grad_t.row(0) + grad_t.row(1) + grad_t.row(2)).transpose();
    for (int c = 0; c < 3; ++c) grad[c + 1] = grad_t.row(c).transpose();
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        stiffness.emplace_back(ids[a], ids[b], volume * grad[a].dot(grad[b]));
        mass.emplace_back(ids[a], ids[b], a == b ? volume / 10.0 : volume / 20.0);
      }
    }
  }

  VolumetricLaplacian result;
  result.L.resize(n, n);
  result.L.setFromTriplets(stiffness.begin(), stiffness.end());
  result.M.resize(n, n);
  result.M.setFromTriplets(mass.begin(), mass.end());
  return result;
}

FemDtn fem_dtn_schur(const TetMesh& tet) {
  const VolumetricLaplacian vol = fem_volumetric_laplacian(tet);
  const auto& bnd = tet.boundary_vertices;
  const auto& inner = tet.interior_vertices;
  const Index nb = static_cast<Index>(bnd.size());
  const Index ni = static_cast<Index>(inner.size());
  if (nb == 0) throw Error("fem_dtn_schur: tet mesh has no boundary vertices");

  std::vector<Index> local(tet.num_vertices(), -1);
  for (Index i = 0; i < nb; ++i) local[bnd[i]] = i;
  for (Index i = 0; i < ni; ++i) local[inner[i]] = i;
  std::vector<bool> is_boundary(tet.num_vertices(), false);
  for (Index v : bnd) is_boundary[v] = true;

  Matrix l_bb = Matrix::Zero(nb, nb);
  Matrix l_bi = Matrix::Zero(nb, ni);
  std::vector<Eigen::Triplet<double>> l_ii_triplets;
  for (Index col = 0; col < vol.L.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(vol.L, col); it; ++it) {
      const Index r = it.row(), c = it.col();
      if (is_boundary[r] && is_boundary[c]) {
        l_bb(local[r], local[c]) += it.value();
      } else if (is_boundary[r]) {
        l_bi(local[r], local[c]) += it.value();
      } else if (!is_boundary[c]) {
        l_ii_triplets.emplace_back(local[r], local[c], it.value());
      }
    }
  }

  FemDtn result;
  if (ni == 0) {
    result.S = l_bb;
  } else {
    SparseMatrix l_ii(ni, ni);
    l_ii.setFromTriplets(l_ii_triplets.begin(), l_ii_triplets.end());
    Eigen::SimplicialLDLT<SparseMatrix> factorization(l_ii);
    if (factorization.info() != Eigen::Success) {
      throw SingularInteriorBlock("fem_dtn_schur: interior stiffness block not factorizable");
    }
    const Matrix x = factorization.solve(Matrix(l_bi.transpose()));
    result.S = l_bb - l_bi * x;
    result.S = 0.5 * (result.S + result.S.transpose());
  }

  result.boundary = boundary_mesh(tet);
  result.boundary_mass = galerkin_mass(result.boundary);
  result.boundary_mass_lumped = lumped_mass(result.boundary);
  result.boundary_vertices = bnd;
  return result;
}

}  // namespace steklov
