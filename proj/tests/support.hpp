#pragma once

#include "hede/core_model.hpp"
#include "hede/random.hpp"

#include <cstdint>

namespace hede::testing {

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
{
    RandomStream rng(seed, StreamPurpose::Fuzz, 0);
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = rng.normal();
    return M;
}

inline Vector gaussian_vector(std::size_t size, std::uint64_t seed)
{
    return gaussian_matrix(size, 1, seed).col(0);
}

// Columns with X'X = n I.
inline Matrix orthogonal_design(std::size_t n, std::size_t p, std::uint64_t seed)
{
    const Matrix Q = Eigen::HouseholderQR<Matrix>(gaussian_matrix(n, p, seed)).householderQ()
                     * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    return Q * std::sqrt(static_cast<double>(n));
}

// Standardized Gaussian data set with y = X beta + eps.
inline DataSet gaussian_dataset(std::size_t n, std::size_t p, std::uint64_t seed, double signal = 1.0)
{
    const Matrix X = standardize_columns(gaussian_matrix(n, p, seed));
    Vector beta = gaussian_vector(p, seed + 1) * (signal / std::sqrt(static_cast<double>(p)));
    Vector y = X * beta + gaussian_vector(n, seed + 2);
    return DataSet(std::move(y), X);
}

} // namespace hede::testing
