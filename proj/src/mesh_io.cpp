#include <steklov/mesh_io.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace steklov {

namespace {

std::string lowercase_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

MeshFormat format_of(const std::string& path) {
  const std::string ext = lowercase_extension(path);
  if (ext == "off") return MeshFormat::Off;
  if (ext == "obj") return MeshFormat::Obj;
  throw ParseError("unknown mesh extension: " + path);
}

// Next non-empty line with comments stripped ('#' both formats, also whole-line for OFF).
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
  }
  return false;
}

void append_fan(std::vector<std::array<int, 3>>& faces, const std::vector<int>& polygon) {
  if (polygon.size() < 3) throw ParseError("face with fewer than 3 vertices");
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
    faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
  }
}

TriangleMesh finish(std::vector<std::array<double, 3>>& vs, std::vector<std::array<int, 3>>& fs) {
  Points vertices(static_cast<Index>(vs.size()), 3);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    vertices.row(static_cast<Index>(i)) << vs[i][0], vs[i][1], vs[i][2];
  }
  Faces triangles(static_cast<Index>(fs.size()), 3);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    triangles.row(static_cast<Index>(i)) << fs[i][0], fs[i][1], fs[i][2];
  }
  return make_mesh(std::move(vertices), std::move(triangles));
}

TriangleMesh load_off(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw ParseError("empty OFF file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  std::size_t nv = 0, nf = 0, ne = 0;
  if (magic == "OFF") {
    if (!(header >> nv >> nf >> ne)) {
      if (!next_data_line(in, line)) throw ParseError("OFF missing element counts");
      std::istringstream counts(line);
      if (!(counts >> nv >> nf >> ne)) throw ParseError("OFF malformed element counts");
    }
  } else {
    // Headerless variant: the first line already holds the counts.
    std::istringstream counts(line);
    if (!(counts >> nv >> nf >> ne)) throw ParseError("OFF missing magic and counts");
  }
  std::vector<std::array<double, 3>> vs(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_data_line(in, line)) throw ParseError("OFF truncated vertex list");
    std::istringstream row(line);
    if (!(row >> vs[i][0] >> vs[i][1] >> vs[i][2])) throw ParseError("OFF malformed vertex line");
  }
  std::vector<std::array<int, 3>> fs;
  fs.reserve(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!next_data_line(in, line)) throw ParseError("OFF truncated face list");
    std::istringstream row(line);
    std::size_t arity = 0;
    if (!(row >> arity)) throw ParseError("OFF malformed face line");
    std::vector<int> polygon(arity);
    for (std::size_t c = 0; c < arity; ++c) {
      if (!(row >> polygon[c])) throw ParseError("OFF malformed face line");
    }
    append_fan(fs, polygon);
  }
  return finish(vs, fs);
}

TriangleMesh load_obj(std::istream& in) {
  std::vector<std::array<double, 3>> vs;
  std::vector<std::array<int, 3>> fs;
  std::string line;
  while (next_data_line(in, line)) {
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    if (tag == "v") {
      std::array<double, 3> p{};
      if (!(row >> p[0] >> p[1] >> p[2])) throw ParseError("OBJ malformed vertex line");
      vs.push_back(p);
    } else if (tag == "f") {
      std::vector<int> polygon;
      std::string item;
      while (row >> item) {
        // "v", "v/vt", "v//vn", "v/vt/vn" all start with the vertex index.
        const int raw = std::stoi(item.substr(0, item.find('/')));
        const int v = raw > 0 ? raw - 1 : static_cast<int>(vs.size()) + raw;
        polygon.push_back(v);
      }
      append_fan(fs, polygon);
    }
  }
  return finish(vs, fs);
}

}  // namespace

TriangleMesh load_mesh(std::istream& in, MeshFormat format) {
  try {
    return format == MeshFormat::Off ? load_off(in) : load_obj(in);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed numeric field");
  } catch (const std::out_of_range&) {
    throw ParseError("numeric field out of range");
  }
}

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return load_mesh(in, format_of(path));
}

void save_mesh(const TriangleMesh& mesh, std::ostream& out, MeshFormat format) {
  out << std::setprecision(17);
  if (format == MeshFormat::Off) {
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      out << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' ' << mesh.vertices(v, 2) << '\n';
    }
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      out << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' '
          << mesh.triangles(t, 2) << '\n';
    }
  } else {
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      out << "v " << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' ' << mesh.vertices(v, 2)
          << '\n';
    }
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      out << "f " << mesh.triangles(t, 0) + 1 << ' ' << mesh.triangles(t, 1) + 1 << ' '
          << mesh.triangles(t, 2) + 1 << '\n';
    }
  }
}

void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  save_mesh(mesh, out, format_of(path));
}

TetMesh load_tet_mesh(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw ParseError("empty tet mesh file");
  std::istringstream counts(line);
  std::size_t nv = 0, nt = 0;
  if (!(counts >> nv >> nt)) throw ParseError("tet mesh missing counts");
  Points vertices(static_cast<Index>(nv), 3);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_data_line(in, line)) throw ParseError("tet mesh truncated vertex list");
    std::istringstream row(line);
    if (!(row >> vertices(static_cast<Index>(i), 0) >> vertices(static_cast<Index>(i), 1) >>
          vertices(static_cast<Index>(i), 2))) {
      throw ParseError("tet mesh malformed vertex line");
    }
  }
  Cells tets(static_cast<Index>(nt), 4);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!next_data_line(in, line)) throw ParseError("tet mesh truncated element list");
    std::istringstream row(line);
    if (!(row >> tets(static_cast<Index>(i), 0) >> tets(static_cast<Index>(i), 1) >>
          tets(static_cast<Index>(i), 2) >> tets(static_cast<Index>(i), 3))) {
      throw ParseError("tet mesh malformed element line");
    }
  }
  return make_tet_mesh(std::move(vertices), std::move(tets));
}

TetMesh load_tet_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return load_tet_mesh(in);
}

void save_tet_mesh(const TetMesh& tet, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  out << tet.num_vertices() << ' ' << tet.num_tets() << '\n';
  for (Index v = 0; v < tet.num_vertices(); ++v) {
    out << tet.vertices(v, 0) << ' ' << tet.vertices(v, 1) << ' ' << tet.vertices(v, 2) << '\n';
  }
  for (Index t = 0; t < tet.num_tets(); ++t) {
    out << tet.tets(t, 0) << ' ' << tet.tets(t, 1) << ' ' << tet.tets(t, 2) << ' ' << tet.tets(t, 3)
        << '\n';
  }
}

}  // namespace steklov
