#pragma once

#include "hede/core_model.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace hede {

/// Contiguous column ranges covering 0..p-1. Stored 0-based, half-open.
class BlockSpec
{
public:
    static constexpr std::size_t kDefaultMaxBlock = 2000;

    BlockSpec() = default;
    BlockSpec(std::vector<std::pair<std::size_t, std::size_t>> ranges, std::size_t p,
              std::size_t max_block = kDefaultMaxBlock);

    /// Equal blocks of `size` columns (the last one may be shorter).
    static BlockSpec uniform(std::size_t p, std::size_t size, std::size_t max_block = kDefaultMaxBlock);

    /// Block file text: one "start:end" (1-based, inclusive) per line, or a
    /// single integer block size. Blank lines and '#' comments are skipped.
    static BlockSpec parse(const std::string& text, std::size_t p,
                           std::size_t max_block = kDefaultMaxBlock);

    const std::vector<std::pair<std::size_t, std::size_t>>& ranges() const noexcept { return ranges_; }
    std::size_t size() const noexcept { return ranges_.size(); }
    std::size_t p() const noexcept { return p_; }
    std::size_t largest_block() const noexcept;

private:
    std::vector<std::pair<std::size_t, std::size_t>> ranges_;
    std::size_t p_ = 0;
};

struct BlockCovariance
{
    BlockSpec spec;
    std::vector<Matrix> blocks;             // after the eigenvalue floor
    std::vector<Matrix> inverse_sqrt_blocks;
    std::size_t floored_eigenvalues = 0;

    /// Dense p x p assembly (tests and small problems only).
    Matrix dense() const;
};

struct CovarianceOptions
{
    /// Eigenvalues are raised to floor_ratio * trace / blocksize. Zero
    /// disables the floor, and a nonpositive eigenvalue then throws.
    double floor_ratio = 1e-6;
};

/// Blockwise sample covariance (centered, divided by n) and its inverse
/// square root.
BlockCovariance estimate_block_covariance(const DataSet& data, const BlockSpec& spec,
                                          const CovarianceOptions& opts = {});

/// Inverse square roots for known blocks (e.g. a true Sigma).
BlockCovariance make_block_covariance(const BlockSpec& spec, std::vector<Matrix> blocks,
                                      const CovarianceOptions& opts = {});

/// X * Sigma^{-1/2} blockwise.
Matrix whiten_design(const Matrix& X, const BlockCovariance& cov);

/// Whitened design with re-standardized columns; y is carried over.
DataSet whiten(const DataSet& data, const BlockCovariance& cov);

} // namespace hede
