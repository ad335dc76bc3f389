#pragma once

#include "hede/core_model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hede {

struct LassoConfig
{
    /// Relative coordinate-change tolerance: a sweep converges when
    /// max_j |delta b_j| <= tol * max(||b||_inf, 1e-6 ||X'y||_inf / n).
    double tol = 1e-7;
    /// Cap on coordinate sweeps (full and active-set sweeps both count).
    std::size_t max_iters = 100000;
    bool warm_start = true;
    /// Record the objective after every sweep into FitResult::objective_trace.
    bool record_objective = false;
};

/// Thin spectral factorization of X / sqrt(n), reused for every lambda_R.
struct RidgePathCache
{
    Vector singular_values;  // nonincreasing, length min(n, p)
    Matrix left_factors;     // n x min(n, p)
    Matrix right_factors;    // p x min(n, p)
    Vector projected_response; // U' y / sqrt(n)

    /// df(lambda) = sum_i s_i^2 / (s_i^2 + lambda).
    double degrees_of_freedom(double lambda_R) const;
};

/// (1/2n)||y - Xb||^2 + (lambda/sqrt(n))||b||_1
double lasso_objective(const DataSet& data, const Vector& b, double lambda_L);

/// Soft-threshold operator.
inline double soft_threshold(double value, double threshold) noexcept
{
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

/// Cyclic coordinate descent for the sqrt(n)-scaled Lasso. Coordinates are
/// set by an exact soft-threshold, so zeros are exact and df_hat = ||b||_0.
/// Throws NotConverged if max_iters sweeps are exhausted.
FitResult fit_lasso(const DataSet& data, double lambda_L, const LassoConfig& cfg = {});
FitResult fit_lasso(const DataSet& data, double lambda_L, const LassoConfig& cfg, const Vector& init);

/// Solve along a lambda path (any order; decreasing is fastest) with warm
/// starts when cfg.warm_start is set.
std::vector<FitResult> fit_lasso_path(const DataSet& data, std::span<const double> lambdas,
                                      const LassoConfig& cfg = {});

/// Reusable Lasso workspace (column norms cached) for path solves.
class LassoSolver
{
public:
    LassoSolver(const DataSet& data, LassoConfig cfg);

    FitResult solve(double lambda_L, const Vector* init) const;

    /// max_j |x_j'y| / sqrt(n): the smallest lambda with an all-zero solution.
    double lambda_max() const;

private:
    const DataSet& data_;
    LassoConfig cfg_;
    Vector col_sq_norms_;
};

RidgePathCache build_ridge_cache(const DataSet& data);

/// Ridge solution of (X'X/n + lambda I) b = X'y/n via the cache; also fills
/// df_hat with the trace of the ridge hat operator.
FitResult fit_ridge(const DataSet& data, double lambda_R, const RidgePathCache& cache);

} // namespace hede
