#include "hede/covariance.hpp"

#include "hede/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <sstream>

namespace hede {
namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t parse_index(const std::string& token, std::size_t line_no)
{
    std::size_t value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end || token.empty()) {
        throw InvalidArgument("block file line " + std::to_string(line_no) + ": bad integer '" + token + "'");
    }
    return value;
}

bool is_identity(const Matrix& m)
{
    return m.rows() == m.cols() && (m.array() == Matrix::Identity(m.rows(), m.cols()).array()).all();
}

} // namespace

BlockSpec::BlockSpec(std::vector<std::pair<std::size_t, std::size_t>> ranges, std::size_t p,
                     std::size_t max_block)
    : ranges_(std::move(ranges)), p_(p)
{
    if (ranges_.empty()) throw InvalidArgument("block spec has no blocks");
    std::size_t expected = 0;
    for (const auto& [begin, end] : ranges_) {
        if (begin != expected) throw InvalidArgument("blocks must be contiguous and sorted from column 1");
        if (end <= begin) throw InvalidArgument("empty block");
        if (end - begin > max_block) {
            throw InvalidArgument("block of size " + std::to_string(end - begin) + " exceeds cap "
                                  + std::to_string(max_block));
        }
        expected = end;
    }
    if (expected != p) {
        throw DimensionMismatch("blocks cover " + std::to_string(expected) + " columns, p = "
                                + std::to_string(p));
    }
}

BlockSpec BlockSpec::uniform(std::size_t p, std::size_t size, std::size_t max_block)
{
    if (size == 0) throw InvalidArgument("block size must be positive");
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t start = 0; start < p; start += size) ranges.emplace_back(start, std::min(p, start + size));
    return BlockSpec(std::move(ranges), p, max_block);
}

BlockSpec BlockSpec::parse(const std::string& text, std::size_t p, std::size_t max_block)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::optional<std::size_t> block_size;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            if (block_size || !ranges.empty()) {
                throw InvalidArgument("block file line " + std::to_string(line_no)
                                      + ": a block size must be the only entry");
            }
            block_size = parse_index(line, line_no);
            continue;
        }
        if (block_size) {
            throw InvalidArgument("block file line " + std::to_string(line_no)
                                  + ": a block size must be the only entry");
        }
        const auto start = parse_index(trim(line.substr(0, colon)), line_no);
        const auto end = parse_index(trim(line.substr(colon + 1)), line_no);
        if (start < 1 || end < start) {
            throw InvalidArgument("block file line " + std::to_string(line_no) + ": bad range " + line);
        }
        ranges.emplace_back(start - 1, end);
    }
    if (block_size) return uniform(p, *block_size, max_block);
    return BlockSpec(std::move(ranges), p, max_block);
}

std::size_t BlockSpec::largest_block() const noexcept
{
    std::size_t largest = 0;
    for (const auto& [begin, end] : ranges_) largest = std::max(largest, end - begin);
    return largest;
}

Matrix BlockCovariance::dense() const
{
    const auto p = static_cast<Eigen::Index>(spec.p());
    Matrix out = Matrix::Zero(p, p);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto start = static_cast<Eigen::Index>(spec.ranges()[b].first);
        const auto size = blocks[b].rows();
        out.block(start, start, size, size) = blocks[b];
    }
    return out;
}

BlockCovariance make_block_covariance(const BlockSpec& spec, std::vector<Matrix> blocks,
                                      const CovarianceOptions& opts)
{
    if (blocks.size() != spec.size()) throw DimensionMismatch("block count differs from spec");
    BlockCovariance cov;
    cov.spec = spec;
    cov.blocks.resize(blocks.size());
    cov.inverse_sqrt_blocks.resize(blocks.size());

    std::vector<std::size_t> floored(blocks.size(), 0);
    std::vector<double> singular(blocks.size(), 1.0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks.size()); ++bi) {
        const auto b = static_cast<std::size_t>(bi);
        const auto [begin, end] = spec.ranges()[b];
        const auto size = static_cast<Eigen::Index>(end - begin);
        Matrix S = std::move(blocks[b]);
        if (S.rows() != size || S.cols() != size) continue;
        S = 0.5 * (S + S.transpose()).eval();
        if (is_identity(S)) {
            cov.blocks[b] = S;
            cov.inverse_sqrt_blocks[b] = S;
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
        Vector ev = eig.eigenvalues();
        if (opts.floor_ratio > 0.0) {
            const double floor = opts.floor_ratio * std::max(S.trace(), 0.0) / static_cast<double>(size);
            for (auto& e : ev) {
                if (e < floor) {
                    e = floor;
                    ++floored[b];
                }
            }
            if (!(floor > 0.0) && ev.minCoeff() <= 0.0) singular[b] = ev.minCoeff();
        } else if (ev.minCoeff() <= 1e-12 * std::abs(S.trace())) {
            // Numerically zero counts as singular.
            singular[b] = std::min(ev.minCoeff(), 0.0);
        }
        if (singular[b] <= 0.0) continue;
        const Matrix& V = eig.eigenvectors();
        cov.blocks[b] = V * ev.asDiagonal() * V.transpose();
        cov.inverse_sqrt_blocks[b] = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
    }
    for (std::size_t b = 0; b < cov.blocks.size(); ++b) {
        if (cov.blocks[b].size() == 0 && singular[b] > 0.0) {
            throw DimensionMismatch("block " + std::to_string(b) + " has the wrong shape");
        }
        if (singular[b] <= 0.0) throw SingularBlock(b, singular[b]);
        cov.floored_eigenvalues += floored[b];
    }
    return cov;
}

BlockCovariance estimate_block_covariance(const DataSet& data, const BlockSpec& spec,
                                          const CovarianceOptions& opts)
{
    if (spec.p() != data.p()) throw DimensionMismatch("block spec covers a different p");
    const double n = static_cast<double>(data.n());
    std::vector<Matrix> blocks;
    blocks.reserve(spec.size());
    for (const auto& [begin, end] : spec.ranges()) {
        const auto cols = data.X().middleCols(static_cast<Eigen::Index>(begin),
                                              static_cast<Eigen::Index>(end - begin));
        const Matrix centered = cols.rowwise() - cols.colwise().mean();
        blocks.push_back(centered.transpose() * centered / n);
    }
    return make_block_covariance(spec, std::move(blocks), opts);
}

Matrix whiten_design(const Matrix& X, const BlockCovariance& cov)
{
    if (static_cast<std::size_t>(X.cols()) != cov.spec.p()) {
        throw DimensionMismatch("design has " + std::to_string(X.cols()) + " columns, covariance "
                                + std::to_string(cov.spec.p()));
    }
    Matrix out = X;
    for (std::size_t b = 0; b < cov.inverse_sqrt_blocks.size(); ++b) {
        const Matrix& W = cov.inverse_sqrt_blocks[b];
        if (is_identity(W)) continue;
        const auto start = static_cast<Eigen::Index>(cov.spec.ranges()[b].first);
        out.middleCols(start, W.cols()) = X.middleCols(start, W.cols()) * W;
    }
    return out;
}

DataSet whiten(const DataSet& data, const BlockCovariance& cov)
{
    const bool identity = std::all_of(cov.inverse_sqrt_blocks.begin(), cov.inverse_sqrt_blocks.end(), is_identity);
    if (identity && cov.spec.p() == data.p()) return data;
    return DataSet(data.y(), standardize_columns(whiten_design(data.X(), cov)));
}

} // namespace hede
