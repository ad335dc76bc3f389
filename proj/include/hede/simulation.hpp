#pragma once

#include "hede/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>

namespace hede {

enum class SignalKind { ZeroInflatedNormal, StratifiedMixture };
enum class DesignKind { Genotype, Gaussian };

struct StratificationConfig
{
    std::size_t num_strata = 10; // contiguous, equal-width column strata
    double c_low = 0.05;         // even strata
    double c_high = 0.5;         // odd strata
};

struct SimConfig
{
    std::size_t n = 500;
    std::size_t p = 1000;
    double h2 = 0.5;
    double kappa = 0.1;
    std::pair<double, double> maf_range{0.05, 0.5};
    double noise_sigma2 = 1.0;
    std::uint64_t seed = 1;
    SignalKind signal_kind = SignalKind::ZeroInflatedNormal;
    StratificationConfig strat;
    DesignKind design = DesignKind::Genotype;
    /// AR(ar_rho) population correlation within consecutive blocks of
    /// ar_block columns; ar_rho = 0 gives an independent design.
    double ar_rho = 0.0;
    std::size_t ar_block = 10;
    /// Redraw an all-zero support instead of throwing NoNonzeros.
    bool resample_empty_support = true;

    void validate() const;
};

struct SimulatedData
{
    DataSet data;
    GroundTruth truth;
    /// b' (X'X/n) b / (b' (X'X/n) b + sigma2).
    double h2_realized = 0.0;
};

/// Raw 0/1/2 counts, G_ij ~ Binomial(2, pi_j), pi_j ~ U(maf_range). Columns
/// that come out monomorphic are redrawn from the same substream.
Matrix simulate_genotypes(const SimConfig& cfg);

/// Coefficients (population Sigma attached when ar_rho != 0).
GroundTruth simulate_signal(const SimConfig& cfg);

/// AR(rho) correlation matrix of the given size.
Matrix ar1_block(std::size_t size, double rho);

/// Block-diagonal AR(rho) population covariance of the correlated mode.
Matrix ar1_covariance(std::size_t p, double rho, std::size_t block);

/// y = X beta + eps. With `truth` the coefficients are reused and only the
/// design and noise are drawn from cfg.seed.
SimulatedData simulate_dataset(const SimConfig& cfg, const std::optional<GroundTruth>& truth = std::nullopt);

double realized_h2(const Matrix& X, const Vector& beta, double sigma2);

} // namespace hede
