#pragma once

#include "hede/core_model.hpp"
#include "hede/solvers.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace hede {

struct GridConfig
{
    double t_min = 0.01;
    double t_max = 0.5;
    /// Natural-log spacing between consecutive lambdas.
    double log_step = 0.1;
    /// Explicit (low, high) lambda range applied to both margins. When absent
    /// the Lasso path starts at its null threshold and the ridge range is
    /// bracketed by bisection on df/n.
    std::optional<std::pair<double, double>> lambda_seed_range;
    std::size_t max_grid_points = 200;
    /// Lasso path never goes below lambda_max * lasso_min_ratio.
    double lasso_min_ratio = 1e-4;
    LassoConfig lasso;

    void validate() const;
};

struct GridPoint
{
    double lambda = 0.0;
    double df = 0.0;
    bool retained = false;
};

/// Every evaluated lambda per margin, in evaluation (decreasing) order.
struct LambdaGrid
{
    std::vector<GridPoint> lasso;
    std::vector<GridPoint> ridge;

    std::vector<double> retained_lasso() const;
    std::vector<double> retained_ridge() const;
};

/// Retained fits for both margins, aligned with the retained grid points.
struct AdmissibleFits
{
    LambdaGrid grid;
    std::vector<FitResult> lasso;
    std::vector<FitResult> ridge;
};

bool df_admissible(double df, std::size_t n, const GridConfig& cfg);

/// Log-spaced lambda grids filtered per margin so that ||b_L||_0 / n and
/// df_R / n lie in [t_min, t_max]. Throws EmptyGrid if a margin is empty.
LambdaGrid build_grid(const DataSet& data, const GridConfig& cfg, const RidgePathCache& cache);

/// build_grid that also keeps the fitted solutions.
AdmissibleFits build_admissible_fits(const DataSet& data, const GridConfig& cfg,
                                     const RidgePathCache& cache);

/// MSE-minimizing ensemble weight, clamped to [0, 1]; 0 when the
/// denominator is below 1e-12 (or not a number).
double select_alpha(const TauEstimates& taus);

/// a^2 tau_L2 + 2a(1-a) tau_LR + (1-a)^2 tau_R2.
double ensemble_tau(const TauEstimates& taus, double alpha);

struct HedeResult
{
    HeritabilityEstimate estimate;
    LambdaGrid grid;
    TauEstimates selected_taus;
    double df_L = 0.0;
    double df_R = 0.0;
    std::size_t pairs_evaluated = 0;
    std::size_t pairs_degenerate = 0;
};

/// Full HEDE pipeline on (already whitened, standardized) data.
HedeResult run_hede_detailed(const DataSet& data, const GridConfig& cfg = {});
HeritabilityEstimate run_hede(const DataSet& data, const GridConfig& cfg = {});

enum class RecheckMode {
    /// Re-apply the filter to the recorded df values.
    Recorded,
    /// Recompute every retained df independently: cold-start Lasso refits and
    /// ridge traces from an eigendecomposition of the smaller Gram matrix.
    Refit,
};

struct GridRecheck
{
    bool ok = true;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_df_frac = 0.0; // df/n furthest outside the window, if any
};

GridRecheck recheck_grid(const DataSet& data, const LambdaGrid& grid, const GridConfig& cfg,
                         RecheckMode mode);

} // namespace hede
