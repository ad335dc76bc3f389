#include "hede/io.hpp"

#include "hede/errors.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace hede::io {
namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool is_missing(const std::string& field)
{
    return field.empty() || field == "NA" || field == "na" || field == "nan" || field == "NaN";
}

double parse_field(const std::string& field, const std::filesystem::path& path, std::size_t line, bool allow_missing)
{
    if (allow_missing && is_missing(field)) return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || field.empty() || !std::isfinite(value)) {
        throw InvalidArgument(path.string() + ":" + std::to_string(line) + ": cannot parse '" + field + "'");
    }
    return value;
}

} // namespace

std::string format_double(double value)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw InvalidArgument("cannot format double");
    return std::string(buf, ptr);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidArgument("write failed for " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path, bool allow_missing)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::size_t count = 0;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            values.push_back(parse_field(trim(rest.substr(0, comma)), path, line_no, allow_missing));
            ++count;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (rows == 0) cols = count;
        else if (count != cols) {
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected "
                                  + std::to_string(cols) + " fields, got " + std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw InvalidArgument(path.string() + " is empty");
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    return M;
}

Vector read_vector_csv(const std::filesystem::path& path)
{
    const Matrix M = read_matrix_csv(path);
    if (M.cols() != 1) throw InvalidArgument(path.string() + ": expected one value per line");
    return M.col(0);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M)
{
    std::string text;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) text += ',';
            text += format_double(M(i, j));
        }
        text += '\n';
    }
    write_text(path, text);
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v)
{
    write_matrix_csv(path, Matrix(v));
}

std::map<std::string, std::string> parse_key_values(const std::string& text)
{
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw InvalidArgument("config line " + std::to_string(line_no) + ": empty key");
        out[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return out;
}

} // namespace hede::io
