#pragma once

#include "hede/core_model.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace hede::io {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Headerless comma-separated matrix. With allow_missing, empty fields and
/// "NA"/"nan" become quiet NaN; otherwise they are an error.
Matrix read_matrix_csv(const std::filesystem::path& path, bool allow_missing = false);
/// One value per line (a single-column CSV).
Vector read_vector_csv(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Flat "key = value" lines; '#' starts a comment. Later keys override.
std::map<std::string, std::string> parse_key_values(const std::string& text);

} // namespace hede::io
