#include "hede/core_model.hpp"

#include "hede/errors.hpp"

#include <cmath>
#include <string>

namespace hede {

DataSet::DataSet(Vector y, Matrix X)
    : y_(std::move(y)), X_(std::move(X))
{
    if (X_.rows() < 2) throw TooFewSamples(static_cast<std::size_t>(X_.rows()));
    if (X_.cols() < 1) throw InvalidArgument("design must have at least one column");
    if (y_.size() != X_.rows()) {
        throw DimensionMismatch("y has " + std::to_string(y_.size()) + " entries, X has "
                                + std::to_string(X_.rows()) + " rows");
    }
    if (!y_.allFinite() || !X_.allFinite()) {
        throw InvalidArgument("data contain non-finite values");
    }
}

DataSet DataSet::with_response(Vector y) const
{
    return DataSet(std::move(y), X_);
}

double GroundTruth::signal_variance() const
{
    if (Sigma) return beta.dot(*Sigma * beta);
    return beta.squaredNorm();
}

double population_h2(const Vector& beta, const std::optional<Matrix>& Sigma, double sigma2)
{
    const double signal = Sigma ? beta.dot(*Sigma * beta) : beta.squaredNorm();
    const double total = signal + sigma2;
    return total > 0.0 ? signal / total : 0.0;
}

GroundTruth make_ground_truth(Vector beta, double sigma2, std::optional<Matrix> Sigma)
{
    GroundTruth truth;
    truth.h2_true = population_h2(beta, Sigma, sigma2);
    truth.beta = std::move(beta);
    truth.sigma2 = sigma2;
    truth.Sigma = std::move(Sigma);
    return truth;
}

double clamp_unit(double x) noexcept
{
    if (!(x > 0.0)) return 0.0;
    return x < 1.0 ? x : 1.0;
}

Matrix normalize_genotypes(const Matrix& G)
{
    const auto n = G.rows();
    if (n < 2) throw TooFewSamples(static_cast<std::size_t>(n));

    Matrix X(n, G.cols());
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
        const auto g = G.col(j);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = g(i);
            if (v != 0.0 && v != 1.0 && v != 2.0) {
                throw InvalidArgument("genotype (" + std::to_string(i) + ", " + std::to_string(j)
                                      + ") = " + std::to_string(v) + " is not in {0,1,2}");
            }
        }
        const double freq = g.sum() / (2.0 * static_cast<double>(n));
        if (freq <= 0.0 || freq >= 1.0) throw ConstantColumn(static_cast<std::size_t>(j));

        auto x = X.col(j);
        x = (g.array() - 2.0 * freq) / std::sqrt(2.0 * freq * (1.0 - freq));
        // 2*freq is the exact column mean; re-center anyway to kill rounding.
        x.array() -= x.mean();
        const double var = x.squaredNorm() / static_cast<double>(n);
        if (!(var > 1e-24)) throw ConstantColumn(static_cast<std::size_t>(j));
        x /= std::sqrt(var);
    }
    return X;
}

DataSet make_genotype_dataset(Vector y, const Matrix& G)
{
    return DataSet(std::move(y), normalize_genotypes(G));
}

Matrix standardize_columns(const Matrix& X)
{
    const auto n = X.rows();
    Matrix Z(n, X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        auto z = Z.col(j);
        z = X.col(j).array() - X.col(j).mean();
        const double var = z.squaredNorm() / static_cast<double>(n);
        if (!(var > 1e-24)) throw ConstantColumn(static_cast<std::size_t>(j));
        z /= std::sqrt(var);
    }
    return Z;
}

double sample_variance(const Vector& y)
{
    const auto n = y.size();
    if (n < 2) throw TooFewSamples(static_cast<std::size_t>(n));
    const double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(n - 1);
}

} // namespace hede
