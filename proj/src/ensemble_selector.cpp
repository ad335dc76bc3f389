#include "hede/ensemble_selector.hpp"

#include "hede/debias.hpp"
#include "hede/errors.hpp"
#include "hede/tau_estimation.hpp"

#include <boost/math/tools/roots.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>

namespace hede {
namespace {

constexpr double kAlphaDenominatorFloor = 1e-12;

std::vector<double> log_grid(double high, double low, double step, std::size_t max_points)
{
    std::vector<double> grid;
    for (std::size_t k = 0; k < max_points; ++k) {
        const double lambda = high * std::exp(-step * static_cast<double>(k));
        if (lambda < low * (1.0 - 1e-12)) break;
        grid.push_back(lambda);
    }
    return grid;
}

void throw_empty(const char* margin, const std::vector<GridPoint>& points, std::size_t n)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& pt : points) {
        lo = std::min(lo, pt.df / static_cast<double>(n));
        hi = std::max(hi, pt.df / static_cast<double>(n));
    }
    if (points.empty()) lo = hi = 0.0;
    throw EmptyGrid(margin, lo, hi);
}

/// Solve df_R(lambda)/n = target for lambda by a bracketed root in log-lambda.
double ridge_lambda_for_df(const RidgePathCache& cache, std::size_t n, double target)
{
    const double s_max = cache.singular_values.size() ? cache.singular_values(0) : 0.0;
    const double s2 = s_max * s_max;
    const double nn = static_cast<double>(n);
    auto f = [&](double log_lambda) { return cache.degrees_of_freedom(std::exp(log_lambda)) / nn - target; };

    double lo = std::log(s2 * 1e-14);
    double hi = std::log(s2 * (static_cast<double>(cache.singular_values.size()) / (target * nn) + 1.0));
    if (f(lo) < 0.0 || f(hi) > 0.0) throw NoBracket("ridge df/n = " + std::to_string(target));

    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return std::exp(0.5 * (a + b));
}

std::vector<double> ridge_lambdas(const DataSet& data, const GridConfig& cfg, const RidgePathCache& cache)
{
    if (cfg.lambda_seed_range) {
        return log_grid(cfg.lambda_seed_range->second, cfg.lambda_seed_range->first, cfg.log_step,
                        cfg.max_grid_points);
    }
    const std::size_t n = data.n();
    const double s_max = cache.singular_values.size() ? cache.singular_values(0) : 0.0;
    const double rank_df = static_cast<double>(
        (cache.singular_values.array() > 1e-12 * std::max(s_max, 1e-300)).count());
    if (!(s_max > 0.0) || rank_df / static_cast<double>(n) < cfg.t_min) {
        std::vector<GridPoint> probe{{1.0, s_max > 0.0 ? rank_df : 0.0, false}};
        throw_empty("ridge", probe, n);
    }

    // Nudge inwards so the window endpoints survive the filter recheck.
    const double high = ridge_lambda_for_df(cache, n, cfg.t_min) * (1.0 - 1e-9);
    double low = 0.0;
    if (rank_df / static_cast<double>(n) > cfg.t_max) {
        low = ridge_lambda_for_df(cache, n, cfg.t_max) * (1.0 + 1e-9);
    }
    return log_grid(high, low, cfg.log_step, cfg.max_grid_points);
}

} // namespace

void GridConfig::validate() const
{
    if (!(t_min > 0.0 && t_min < t_max && t_max < 1.0)) {
        throw InvalidArgument("grid window must satisfy 0 < t_min < t_max < 1");
    }
    if (!(log_step > 0.0) || !std::isfinite(log_step)) throw InvalidArgument("log_step must be > 0");
    if (max_grid_points < 1) throw InvalidArgument("max_grid_points must be >= 1");
    if (!(lasso_min_ratio > 0.0 && lasso_min_ratio < 1.0)) {
        throw InvalidArgument("lasso_min_ratio must lie in (0, 1)");
    }
    if (lambda_seed_range) {
        const auto [low, high] = *lambda_seed_range;
        if (!(low > 0.0 && low <= high && std::isfinite(high))) {
            throw InvalidArgument("lambda_seed_range must satisfy 0 < low <= high");
        }
    }
}

std::vector<double> LambdaGrid::retained_lasso() const
{
    std::vector<double> out;
    for (const auto& pt : lasso)
        if (pt.retained) out.push_back(pt.lambda);
    return out;
}

std::vector<double> LambdaGrid::retained_ridge() const
{
    std::vector<double> out;
    for (const auto& pt : ridge)
        if (pt.retained) out.push_back(pt.lambda);
    return out;
}

bool df_admissible(double df, std::size_t n, const GridConfig& cfg)
{
    const double frac = df / static_cast<double>(n);
    return frac >= cfg.t_min && frac <= cfg.t_max;
}

AdmissibleFits build_admissible_fits(const DataSet& data, const GridConfig& cfg,
                                     const RidgePathCache& cache)
{
    cfg.validate();
    const std::size_t n = data.n();
    AdmissibleFits out;

    // Lasso margin: warm-started path, stopped once df/n overshoots t_max.
    LassoSolver solver(data, cfg.lasso);
    std::vector<double> lasso_lambdas;
    if (cfg.lambda_seed_range) {
        lasso_lambdas = log_grid(cfg.lambda_seed_range->second, cfg.lambda_seed_range->first,
                                 cfg.log_step, cfg.max_grid_points);
    } else {
        const double lambda_max = solver.lambda_max();
        // Relative to the Cauchy-Schwarz bound ||y||; a constant y only leaves rounding.
        if (!(lambda_max > 1e-12 * data.y().norm()) || !std::isfinite(lambda_max)) {
            throw_empty("lasso", {{0.0, 0.0, false}}, n);
        }
        lasso_lambdas = log_grid(lambda_max, lambda_max * cfg.lasso_min_ratio, cfg.log_step,
                                 cfg.max_grid_points);
    }
    const Vector* warm = nullptr;
    FitResult previous;
    for (double lambda : lasso_lambdas) {
        FitResult fit = solver.solve(lambda, cfg.lasso.warm_start ? warm : nullptr);
        const bool keep = df_admissible(fit.df_hat, n, cfg);
        out.grid.lasso.push_back({lambda, fit.df_hat, keep});
        const bool overshoot = fit.df_hat / static_cast<double>(n) > cfg.t_max;
        if (keep) out.lasso.push_back(fit);
        previous = std::move(fit);
        warm = &previous.beta_hat;
        if (overshoot) break;
    }
    if (out.lasso.empty()) throw_empty("lasso", out.grid.lasso, n);

    // Ridge margin: every lambda costs O(np) given the cache.
    const auto ridge_grid = ridge_lambdas(data, cfg, cache);
    std::vector<FitResult> ridge_fits(ridge_grid.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(ridge_grid.size()); ++k) {
        ridge_fits[static_cast<std::size_t>(k)] = fit_ridge(data, ridge_grid[static_cast<std::size_t>(k)], cache);
    }
    for (auto& fit : ridge_fits) {
        const bool keep = df_admissible(fit.df_hat, n, cfg);
        out.grid.ridge.push_back({fit.lambda, fit.df_hat, keep});
        if (keep) out.ridge.push_back(std::move(fit));
    }
    if (out.ridge.empty()) throw_empty("ridge", out.grid.ridge, n);
    return out;
}

LambdaGrid build_grid(const DataSet& data, const GridConfig& cfg, const RidgePathCache& cache)
{
    return build_admissible_fits(data, cfg, cache).grid;
}

double select_alpha(const TauEstimates& taus)
{
    const double denominator = taus.tau_R2 - 2.0 * taus.tau_LR + taus.tau_L2;
    if (!(denominator >= kAlphaDenominatorFloor)) return 0.0;
    return clamp_unit((taus.tau_R2 - taus.tau_LR) / denominator);
}

double ensemble_tau(const TauEstimates& taus, double alpha)
{
    const double beta = 1.0 - alpha;
    return alpha * alpha * taus.tau_L2 + 2.0 * alpha * beta * taus.tau_LR + beta * beta * taus.tau_R2;
}

HedeResult run_hede_detailed(const DataSet& data, const GridConfig& cfg)
{
    const std::size_t n = data.n();
    const RidgePathCache cache = build_ridge_cache(data);
    AdmissibleFits fits = build_admissible_fits(data, cfg, cache);

    const auto m_L = static_cast<Eigen::Index>(fits.lasso.size());
    const auto m_R = static_cast<Eigen::Index>(fits.ridge.size());
    Matrix res_L(static_cast<Eigen::Index>(n), m_L);
    Matrix res_R(static_cast<Eigen::Index>(n), m_R);
    for (Eigen::Index i = 0; i < m_L; ++i) res_L.col(i) = fits.lasso[static_cast<std::size_t>(i)].residual;
    for (Eigen::Index j = 0; j < m_R; ++j) res_R.col(j) = fits.ridge[static_cast<std::size_t>(j)].residual;
    const Matrix cross = res_L.transpose() * res_R;
    const Vector norm_L = res_L.colwise().squaredNorm().transpose();
    const Vector norm_R = res_R.colwise().squaredNorm().transpose();

    HedeResult result;
    result.grid = std::move(fits.grid);

    // Sequential ordered reduction: smallest tau_C2, then smallest lambda_L,
    // then smallest lambda_R.
    bool found = false;
    std::tuple<double, double, double> best{0.0, 0.0, 0.0};
    Eigen::Index best_i = 0, best_j = 0;
    double best_alpha = 0.0;
    TauEstimates best_taus;
    for (Eigen::Index i = 0; i < m_L; ++i) {
        for (Eigen::Index j = 0; j < m_R; ++j) {
            const auto& fit_L = fits.lasso[static_cast<std::size_t>(i)];
            const auto& fit_R = fits.ridge[static_cast<std::size_t>(j)];
            ++result.pairs_evaluated;
            TauEstimates taus;
            try {
                taus = taus_from_gram(norm_L(i), norm_R(j), cross(i, j), fit_L.df_hat, fit_R.df_hat, n);
            } catch (const DegenerateDf&) {
                ++result.pairs_degenerate;
                continue;
            }
            const double alpha = select_alpha(taus);
            const double tau_c2 = ensemble_tau(taus, alpha);
            if (!std::isfinite(tau_c2)) {
                ++result.pairs_degenerate;
                continue;
            }
            const std::tuple<double, double, double> key{tau_c2, fit_L.lambda, fit_R.lambda};
            if (!found || key < best) {
                found = true;
                best = key;
                best_i = i;
                best_j = j;
                best_alpha = alpha;
                best_taus = taus;
            }
        }
    }
    if (!found) throw EmptyGrid("pair", 0.0, 0.0);

    const FitResult fit_L = debias_fit(data, fits.lasso[static_cast<std::size_t>(best_i)]);
    const FitResult fit_R = debias_fit(data, fits.ridge[static_cast<std::size_t>(best_j)]);

    EnsembleChoice choice;
    choice.alpha_L = best_alpha;
    choice.lambda_L = fit_L.lambda;
    choice.lambda_R = fit_R.lambda;
    choice.tau_C2_min = std::get<0>(best);
    choice.beta_C_debiased = best_alpha * fit_L.beta_debiased + (1.0 - best_alpha) * fit_R.beta_debiased;

    HeritabilityEstimate& est = result.estimate;
    est.raw_numerator = choice.beta_C_debiased.squaredNorm()
                        - static_cast<double>(data.p()) * choice.tau_C2_min;
    est.sample_var_y = sample_variance(data.y());
    est.h2 = est.sample_var_y > 0.0 ? clamp_unit(est.raw_numerator / est.sample_var_y) : 0.0;
    est.choice = std::move(choice);

    result.selected_taus = best_taus;
    result.df_L = fit_L.df_hat;
    result.df_R = fit_R.df_hat;
    return result;
}

HeritabilityEstimate run_hede(const DataSet& data, const GridConfig& cfg)
{
    return run_hede_detailed(data, cfg).estimate;
}

GridRecheck recheck_grid(const DataSet& data, const LambdaGrid& grid, const GridConfig& cfg,
                         RecheckMode mode)
{
    const std::size_t n = data.n();
    GridRecheck out;
    auto check = [&](double df) {
        ++out.checked;
        if (!df_admissible(df, n, cfg)) {
            out.ok = false;
            ++out.violations;
            out.worst_df_frac = df / static_cast<double>(n);
        }
    };

    if (mode == RecheckMode::Recorded) {
        for (const auto& pt : grid.lasso)
            if (pt.retained) check(pt.df);
        for (const auto& pt : grid.ridge)
            if (pt.retained) check(pt.df);
        return out;
    }

    LassoConfig cold = cfg.lasso;
    cold.warm_start = false;
    for (double lambda : grid.retained_lasso()) check(fit_lasso(data, lambda, cold).df_hat);

    // Nonzero eigenvalues of X'X/n via whichever Gram matrix is smaller.
    const double nn = static_cast<double>(n);
    const Matrix gram = data.n() <= data.p() ? Matrix(data.X() * data.X().transpose() / nn)
                                             : Matrix(data.X().transpose() * data.X() / nn);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const Vector ev = eig.eigenvalues().cwiseMax(0.0);
    for (double lambda : grid.retained_ridge()) {
        check((ev.array() / (ev.array() + lambda)).sum());
    }
    return out;
}

} // namespace hede
