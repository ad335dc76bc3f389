#include "hede/errors.hpp"
#include "hede/io.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace hede;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "hede_test_io";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("format_double round-trips")
{
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 6.02214076e23, 1.0 / 3.0}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("matrix CSV round-trip is exact")
{
    const Matrix M = testing::gaussian_matrix(13, 7, 1);
    const auto path = scratch("m.csv");
    io::write_matrix_csv(path, M);
    const Matrix back = io::read_matrix_csv(path);
    CHECK((back.array() == M.array()).all());

    const Vector v = testing::gaussian_vector(9, 2);
    io::write_vector_csv(scratch("v.csv"), v);
    CHECK((io::read_vector_csv(scratch("v.csv")).array() == v.array()).all());
}

TEST_CASE("missing values and malformed input")
{
    const auto path = scratch("na.csv");
    io::write_text(path, "1,NA,2\n0,,1\n\n2,1,0\n");
    const Matrix M = io::read_matrix_csv(path, true);
    CHECK(M.rows() == 3);
    CHECK(std::isnan(M(0, 1)));
    CHECK(std::isnan(M(1, 1)));
    CHECK(M(2, 0) == 2.0);
    CHECK_THROWS_AS(io::read_matrix_csv(path), InvalidArgument);

    io::write_text(path, "1,2\n3\n");
    CHECK_THROWS_AS(io::read_matrix_csv(path), InvalidArgument);
    io::write_text(path, "1,abc\n");
    CHECK_THROWS_AS(io::read_matrix_csv(path), InvalidArgument);
    io::write_text(path, "");
    CHECK_THROWS_AS(io::read_matrix_csv(path), InvalidArgument);
    io::write_text(path, "1,2\n");
    CHECK_THROWS_AS(io::read_vector_csv(path), InvalidArgument);
    CHECK_THROWS_AS(io::read_matrix_csv(scratch("does_not_exist.csv")), InvalidArgument);
}

TEST_CASE("key-value parsing")
{
    const auto kv = io::parse_key_values("# top\nn = 100\np=200 # trailing\n\nn = 300\n");
    CHECK(kv.size() == 2);
    CHECK(kv.at("n") == "300");
    CHECK(kv.at("p") == "200");
    CHECK_THROWS_AS(io::parse_key_values("no equals sign\n"), InvalidArgument);
}
