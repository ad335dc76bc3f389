#include "hede/simulation.hpp"

#include "hede/errors.hpp"
#include "hede/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace hede {
namespace {

constexpr std::uint64_t kMaxSupportAttempts = 1000;

std::uint64_t support_index(std::uint64_t attempt, std::size_t j)
{
    return (attempt << 32) | static_cast<std::uint64_t>(j);
}

/// Support draw shared by both signal kinds: coordinate j is nonzero with
/// probability prob(j).
template <class Prob>
std::vector<bool> draw_support(const SimConfig& cfg, Prob prob)
{
    for (std::uint64_t attempt = 0; attempt < kMaxSupportAttempts; ++attempt) {
        std::vector<bool> support(cfg.p);
        bool any = false;
        for (std::size_t j = 0; j < cfg.p; ++j) {
            RandomStream rng(cfg.seed, StreamPurpose::SignalSupport, support_index(attempt, j));
            support[j] = rng.bernoulli(prob(j));
            any = any || support[j];
        }
        if (any) return support;
        if (!cfg.resample_empty_support) break;
    }
    throw NoNonzeros("empty support drawn (p = " + std::to_string(cfg.p) + ")");
}

Matrix symmetric_sqrt(const Matrix& S)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal()
           * eig.eigenvectors().transpose();
}

} // namespace

void SimConfig::validate() const
{
    if (n < 2) throw TooFewSamples(n);
    if (p < 1) throw InvalidArgument("p must be at least 1");
    if (!(h2 >= 0.0 && h2 < 1.0)) throw InvalidArgument("h2 must lie in [0, 1)");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in (0, 1]");
    if (!(maf_range.first >= 0.005 && maf_range.first <= maf_range.second && maf_range.second <= 0.5)) {
        throw InvalidArgument("maf range must satisfy 0.005 <= low <= high <= 0.5");
    }
    if (!(noise_sigma2 >= 0.0) || !std::isfinite(noise_sigma2)) throw InvalidArgument("noise_sigma2 must be >= 0");
    if (!(ar_rho > -1.0 && ar_rho < 1.0)) throw InvalidArgument("ar_rho must lie in (-1, 1)");
    if (ar_block < 1) throw InvalidArgument("ar_block must be positive");
    if (signal_kind == SignalKind::StratifiedMixture) {
        if (strat.num_strata < 1 || strat.num_strata > p) throw InvalidArgument("num_strata must lie in [1, p]");
        if (!(strat.c_low > 0.0 && strat.c_low <= 1.0 && strat.c_high > 0.0 && strat.c_high <= 1.0)) {
            throw InvalidArgument("stratum concentrations must lie in (0, 1]");
        }
    }
}

Matrix simulate_genotypes(const SimConfig& cfg)
{
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const auto p = static_cast<Eigen::Index>(cfg.p);
    Matrix G(n, p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) {
        RandomStream freq_rng(cfg.seed, StreamPurpose::AlleleFrequency, static_cast<std::uint64_t>(j));
        const double pi = freq_rng.uniform(cfg.maf_range.first, cfg.maf_range.second);
        RandomStream rng(cfg.seed, StreamPurpose::Genotype, static_cast<std::uint64_t>(j));
        for (;;) {
            for (Eigen::Index i = 0; i < n; ++i) {
                G(i, j) = static_cast<double>(static_cast<int>(rng.bernoulli(pi)) + static_cast<int>(rng.bernoulli(pi)));
            }
            const auto col = G.col(j);
            if ((col.array() != col(0)).any()) break;
        }
    }
    return G;
}

Matrix ar1_block(std::size_t size, double rho)
{
    const auto m = static_cast<Eigen::Index>(size);
    Matrix S(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index k = 0; k < m; ++k) S(i, k) = std::pow(rho, static_cast<double>(std::abs(i - k)));
    return S;
}

Matrix ar1_covariance(std::size_t p, double rho, std::size_t block)
{
    const auto pp = static_cast<Eigen::Index>(p);
    Matrix S = Matrix::Zero(pp, pp);
    for (std::size_t start = 0; start < p; start += block) {
        const std::size_t size = std::min(block, p - start);
        const auto s = static_cast<Eigen::Index>(start);
        const auto m = static_cast<Eigen::Index>(size);
        S.block(s, s, m, m) = ar1_block(size, rho);
    }
    return S;
}

GroundTruth simulate_signal(const SimConfig& cfg)
{
    cfg.validate();
    std::optional<Matrix> Sigma;
    if (cfg.ar_rho != 0.0) Sigma = ar1_covariance(cfg.p, cfg.ar_rho, cfg.ar_block);

    Vector beta = Vector::Zero(static_cast<Eigen::Index>(cfg.p));
    if (cfg.h2 == 0.0) return make_ground_truth(std::move(beta), cfg.noise_sigma2, std::move(Sigma));

    if (cfg.signal_kind == SignalKind::ZeroInflatedNormal) {
        if (cfg.kappa * static_cast<double>(cfg.p) < 0.5) {
            throw NoNonzeros("kappa * p = " + std::to_string(cfg.kappa * static_cast<double>(cfg.p)) + " rounds to 0");
        }
        const auto support = draw_support(cfg, [&](std::size_t) { return cfg.kappa; });
        const double sd = std::sqrt(cfg.h2 / (static_cast<double>(cfg.p) * cfg.kappa * (1.0 - cfg.h2)));
        for (std::size_t j = 0; j < cfg.p; ++j) {
            if (!support[j]) continue;
            RandomStream rng(cfg.seed, StreamPurpose::SignalValue, j);
            beta(static_cast<Eigen::Index>(j)) = sd * rng.normal();
        }
    } else {
        const std::size_t strata = cfg.strat.num_strata;
        const auto support = draw_support(cfg, [&](std::size_t j) {
            const std::size_t s = j * strata / cfg.p;
            return s % 2 == 0 ? cfg.strat.c_low : cfg.strat.c_high;
        });
        std::size_t K = 0;
        for (bool s : support) K += s ? 1 : 0;
        const double sigma_plus = std::sqrt(cfg.h2 / static_cast<double>(K));
        const double shift = sigma_plus / std::sqrt(10.0);
        const double spread = sigma_plus * std::sqrt(0.9);
        for (std::size_t j = 0; j < cfg.p; ++j) {
            if (!support[j]) continue;
            RandomStream rng(cfg.seed, StreamPurpose::SignalValue, j);
            const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            beta(static_cast<Eigen::Index>(j)) = sign * shift + spread * rng.normal();
        }
    }
    return make_ground_truth(std::move(beta), cfg.noise_sigma2, std::move(Sigma));
}

double realized_h2(const Matrix& X, const Vector& beta, double sigma2)
{
    const double signal = (X * beta).squaredNorm() / static_cast<double>(X.rows());
    const double total = signal + sigma2;
    return total > 0.0 ? signal / total : 0.0;
}

SimulatedData simulate_dataset(const SimConfig& cfg, const std::optional<GroundTruth>& truth)
{
    cfg.validate();
    GroundTruth gt = truth ? *truth : simulate_signal(cfg);
    if (gt.beta.size() != static_cast<Eigen::Index>(cfg.p)) throw DimensionMismatch("truth has the wrong p");

    const auto n = static_cast<Eigen::Index>(cfg.n);
    const auto p = static_cast<Eigen::Index>(cfg.p);
    Matrix X;
    if (cfg.design == DesignKind::Genotype) {
        X = normalize_genotypes(simulate_genotypes(cfg));
    } else {
        Matrix Z(n, p);
#pragma omp parallel for schedule(static)
        for (Eigen::Index j = 0; j < p; ++j) {
            RandomStream rng(cfg.seed, StreamPurpose::GaussianDesign, static_cast<std::uint64_t>(j));
            for (Eigen::Index i = 0; i < n; ++i) Z(i, j) = rng.normal();
        }
        X = standardize_columns(Z);
    }

    if (cfg.ar_rho != 0.0) {
        for (std::size_t start = 0; start < cfg.p; start += cfg.ar_block) {
            const auto s = static_cast<Eigen::Index>(start);
            const auto m = static_cast<Eigen::Index>(std::min(cfg.ar_block, cfg.p - start));
            const Matrix root = symmetric_sqrt(ar1_block(static_cast<std::size_t>(m), cfg.ar_rho));
            X.middleCols(s, m) = (X.middleCols(s, m) * root).eval();
        }
        if (!gt.Sigma) gt.Sigma = ar1_covariance(cfg.p, cfg.ar_rho, cfg.ar_block);
    }

    const double sigma2 = gt.sigma2;
    Vector y = X * gt.beta;
    if (sigma2 > 0.0) {
        RandomStream rng(cfg.seed, StreamPurpose::Noise, 0);
        const double sd = std::sqrt(sigma2);
        for (Eigen::Index i = 0; i < n; ++i) y(i) += sd * rng.normal();
    }
    const double h2_realized = realized_h2(X, gt.beta, sigma2);
    gt.h2_true = population_h2(gt.beta, gt.Sigma, sigma2);
    return {DataSet(std::move(y), std::move(X)), std::move(gt), h2_realized};
}

} // namespace hede
