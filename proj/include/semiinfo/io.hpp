#pragma once

#include "semiinfo/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace semiinfo {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

/// Row-major CSV preceded by a "# rows,cols" comment line.
std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// {"rows": r, "cols": c, "data": [row-major values]}
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);

}  // namespace semiinfo
