#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace hede {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Phenotype vector plus column-standardized design. Immutable once built.
class DataSet
{
public:
    DataSet(Vector y, Matrix X);

    const Vector& y() const noexcept { return y_; }
    const Matrix& X() const noexcept { return X_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }
    double delta() const noexcept { return static_cast<double>(p()) / static_cast<double>(n()); }

    /// Same design, different response.
    DataSet with_response(Vector y) const;

private:
    Vector y_;
    Matrix X_;
};

/// Simulation ground truth. `Sigma` is absent for independent designs.
struct GroundTruth
{
    Vector beta;
    double sigma2 = 1.0;
    double h2_true = 0.0;
    std::optional<Matrix> Sigma;

    /// beta' Sigma beta (Sigma = I when absent).
    double signal_variance() const;
};

/// h2 = b'Sb / (b'Sb + sigma2); zero when both vanish.
double population_h2(const Vector& beta, const std::optional<Matrix>& Sigma, double sigma2);

GroundTruth make_ground_truth(Vector beta, double sigma2, std::optional<Matrix> Sigma = std::nullopt);

enum class PenaltyKind { L1, L2 };

struct FitResult
{
    double lambda = 0.0;
    PenaltyKind penalty_kind = PenaltyKind::L1;
    Vector beta_hat;
    Vector beta_debiased; // empty until debias_fit fills it
    double df_hat = 0.0;
    Vector residual;
    std::size_t iterations = 0;
    std::vector<double> objective_trace; // Lasso only, when requested
};

struct TauEstimates
{
    double tau_L2 = 0.0;
    double tau_R2 = 0.0;
    double tau_LR = 0.0;
};

struct EnsembleChoice
{
    double alpha_L = 0.0;
    double lambda_L = 0.0;
    double lambda_R = 0.0;
    double tau_C2_min = 0.0;
    Vector beta_C_debiased;
};

struct HeritabilityEstimate
{
    double h2 = 0.0;
    double raw_numerator = 0.0;
    double sample_var_y = 0.0;
    EnsembleChoice choice;
};

/// Clamp into [0, 1]; NaN maps to 0.
double clamp_unit(double x) noexcept;

/// Standardize a 0/1/2 genotype count matrix: center by twice the allele
/// frequency, divide by the binomial standard deviation, then rescale so each
/// column has unit (1/n) variance.
Matrix normalize_genotypes(const Matrix& G);

/// Convenience: normalize_genotypes plus the response.
DataSet make_genotype_dataset(Vector y, const Matrix& G);

/// Center every column and scale it to unit (1/n) variance.
Matrix standardize_columns(const Matrix& X);

/// Unbiased sample variance (n - 1 denominator).
double sample_variance(const Vector& y);

} // namespace hede
