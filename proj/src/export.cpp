#include <steklov/export.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>

namespace steklov {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

void write_spectrum_json(const std::string& path, const SteklovSpectrum& spectrum,
                         const Json& provenance) {
  Json doc;
  doc["eigenvalues"] = vector_json(spectrum.eigenvalues);
  doc["residuals"] = vector_json(spectrum.residuals);
  doc["converged"] = spectrum.report.converged;
  doc["iterations"] = spectrum.report.iterations;
  doc["deflated_constant"] = spectrum.deflated_constant;
  doc["provenance"] = provenance;
  write_json(path, doc);
}

void write_matrix_csv(const std::string& path, const Matrix& values,
                      const std::vector<std::string>& columns, const Json& provenance) {
  if (static_cast<Index>(columns.size()) != values.cols()) {
    throw Error("write_matrix_csv: column label count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# " << provenance.dump() << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << columns[c] << (c + 1 < columns.size() ? "," : "");
  }
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      out << format_double(values(i, j)) << (j + 1 < values.cols() ? "," : "");
    }
    out << '\n';
  }
}

void write_labels(const std::string& path, const std::vector<int>& labels,
                  const Json& provenance) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# " << provenance.dump() << '\n';
  for (int label : labels) out << label << '\n';
}

void write_matrix_binary(const std::string& path, const Matrix& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const char magic[8] = {'S', 'T', 'K', 'M', 'A', 'T', '0', '1'};
  out.write(magic, sizeof(magic));
  const std::uint64_t rows = static_cast<std::uint64_t>(values.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(values.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

Matrix read_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, 8) != "STKMAT01") throw ParseError("bad matrix dump magic");
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  Matrix values(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw ParseError("matrix dump truncated");
      values(i, j) = v;
    }
  }
  return values;
}

void write_json(const std::string& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << value.dump(2) << '\n';
}

}  // namespace steklov
