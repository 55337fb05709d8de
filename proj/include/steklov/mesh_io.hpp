#pragma once

#include <steklov/mesh.hpp>

#include <iosfwd>
#include <string>

namespace steklov {

enum class MeshFormat { Off, Obj };

// Format deduced from the file extension (.off / .obj).
TriangleMesh load_mesh(const std::string& path);
TriangleMesh load_mesh(std::istream& in, MeshFormat format);

void save_mesh(const TriangleMesh& mesh, const std::string& path);
void save_mesh(const TriangleMesh& mesh, std::ostream& out, MeshFormat format);

// Minimal node/element text format:
//   <num_vertices> <num_tets>
//   x y z                 (one line per vertex)
//   i j k l               (one line per tet, zero-based)
TetMesh load_tet_mesh(const std::string& path);
TetMesh load_tet_mesh(std::istream& in);
void save_tet_mesh(const TetMesh& tet, const std::string& path);

}  // namespace steklov
