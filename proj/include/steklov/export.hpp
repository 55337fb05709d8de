#pragma once

#include <steklov/steklov.hpp>
#include <steklov/types.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace steklov {

using Json = nlohmann::ordered_json;

// 17-significant-digit round-trippable formatting used by every text output.
std::string format_double(double value);

// spectrum.json: {eigenvalues, residuals, converged, deflated_constant,
// provenance}. No timestamps, so reruns are byte-identical.
void write_spectrum_json(const std::string& path, const SteklovSpectrum& spectrum,
                         const Json& provenance);

// CSV with '#'-prefixed provenance lines, then a header row, then one row per
// vertex.
void write_matrix_csv(const std::string& path, const Matrix& values,
                      const std::vector<std::string>& columns, const Json& provenance);

void write_labels(const std::string& path, const std::vector<int>& labels, const Json& provenance);

// Little-endian dump: "STKMAT01", u64 rows, u64 cols, row-major f64.
void write_matrix_binary(const std::string& path, const Matrix& values);
Matrix read_matrix_binary(const std::string& path);

void write_json(const std::string& path, const Json& value);

}  // namespace steklov
