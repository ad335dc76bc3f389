#include "hede/ensemble_selector.hpp"
#include "hede/errors.hpp"
#include "hede/simulation.hpp"
#include "hede/tau_estimation.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hede;

TEST_CASE("select_alpha examples")
{
    CHECK(select_alpha({2.0, 1.0, 0.5}) == doctest::Approx(0.25));
    CHECK(select_alpha({1.0, 1.0, 1.0}) == 0.0);
    CHECK(select_alpha({1.0, 4.0, 0.0}) == doctest::Approx(0.8));
    CHECK(select_alpha({std::numeric_limits<double>::quiet_NaN(), 1.0, 0.0}) == 0.0);
    // Clamped from both sides.
    CHECK(select_alpha({1.0, 4.0, 2.0}) == 1.0);
    CHECK(select_alpha({4.0, 1.0, 2.0}) == 0.0);
}

TEST_CASE("select_alpha minimizes the ensemble variance over a dense alpha grid")
{
    auto grid_min = [](const TauEstimates& t) {
        double best = 1e300, arg = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double a = k / 1000.0;
            const double v = ensemble_tau(t, a);
            if (v < best) {
                best = v;
                arg = a;
            }
        }
        return std::pair{best, arg};
    };
    const TauEstimates fixed{1.0, 4.0, 0.0};
    const double chosen = ensemble_tau(fixed, select_alpha(fixed));
    CHECK(chosen <= grid_min(fixed).first);

    RandomStream rng(7, StreamPurpose::Fuzz, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const double l = rng.uniform(0.01, 3.0), r = rng.uniform(0.01, 3.0);
        const double lr = rng.uniform(-1.0, 1.0) * std::sqrt(l * r);
        const TauEstimates t{l, r, lr};
        const double a = select_alpha(t);
        CHECK_UNARY(a >= 0.0);
        CHECK_UNARY(a <= 1.0);
        CHECK(ensemble_tau(t, a) <= grid_min(t).first + 1e-12);
    }
}

TEST_CASE("ensemble_tau examples")
{
    const TauEstimates t{2.0, 1.0, 0.5};
    CHECK(ensemble_tau(t, 1.0) == 2.0);
    CHECK(ensemble_tau(t, 0.0) == 1.0);
    CHECK(ensemble_tau(t, 0.25) == doctest::Approx(0.875));
}

TEST_CASE("grid config validation")
{
    GridConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.t_min = 0.6;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.log_step = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.t_max = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.lambda_seed_range = std::pair{2.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("empty grid when every fit is null")
{
    const DataSet d = testing::gaussian_dataset(40, 60, 1);
    GridConfig cfg;
    cfg.lambda_seed_range = std::pair{1e6, 1e7};
    try {
        build_grid(d, cfg, build_ridge_cache(d));
        FAIL("expected EmptyGrid");
    } catch (const EmptyGrid& e) {
        CHECK(e.df_frac_max() == 0.0);
        CHECK(e.category() == Error::Category::Grid);
    }
    // A constant response has lambda_max = 0.
    const DataSet flat(Vector::Constant(40, 3.0), d.X());
    CHECK_THROWS_AS(run_hede(flat), EmptyGrid);
}

TEST_CASE("ridge margin on an isotropic design keeps exactly the closed-form interval")
{
    const std::size_t n = 40, p = 30;
    const DataSet d(testing::gaussian_vector(n, 2), testing::orthogonal_design(n, p, 3));
    GridConfig cfg;
    cfg.lambda_seed_range = std::pair{0.01, 200.0};
    const LambdaGrid grid = build_grid(d, cfg, build_ridge_cache(d));
    const double delta = double(p) / double(n);
    const double lo = delta / cfg.t_max - 1.0, hi = delta / cfg.t_min - 1.0;
    std::size_t inside = 0, outside = 0;
    for (const auto& pt : grid.ridge) {
        const bool in = pt.lambda >= lo * (1 + 1e-9) && pt.lambda <= hi * (1 - 1e-9);
        const bool out = pt.lambda < lo * (1 - 1e-9) || pt.lambda > hi * (1 + 1e-9);
        if (in) CHECK(pt.retained);
        if (out) CHECK_FALSE(pt.retained);
        inside += in;
        outside += out;
        CHECK(pt.df == doctest::Approx(double(p) / (1.0 + pt.lambda)).epsilon(1e-10));
    }
    CHECK(inside > 10);
    CHECK(outside > 10);
}

TEST_CASE("automatic grids respect the df window, verified independently")
{
    SimConfig sc;
    sc.n = 300;
    sc.p = 600;
    sc.design = DesignKind::Gaussian;
    sc.seed = 5;
    const auto sim = simulate_dataset(sc);
    const GridConfig cfg;
    const LambdaGrid grid = build_grid(sim.data, cfg, build_ridge_cache(sim.data));
    CHECK(grid.retained_lasso().size() > 5);
    CHECK(grid.retained_ridge().size() > 5);
    for (const auto& pt : grid.ridge) {
        if (pt.retained) {
            CHECK(pt.df / 300.0 >= 0.01);
            CHECK(pt.df / 300.0 <= 0.5);
        }
    }
    const GridRecheck refit = recheck_grid(sim.data, grid, cfg, RecheckMode::Refit);
    CHECK(refit.ok);
    CHECK(refit.checked == grid.retained_lasso().size() + grid.retained_ridge().size());
    CHECK(recheck_grid(sim.data, grid, cfg, RecheckMode::Recorded).ok);

    // Lasso lambdas are log-spaced with the configured step.
    for (std::size_t k = 1; k < grid.lasso.size(); ++k) {
        CHECK(std::log(grid.lasso[k - 1].lambda / grid.lasso[k].lambda) == doctest::Approx(0.1).epsilon(1e-9));
    }
    for (std::size_t k = 1; k < grid.ridge.size(); ++k) {
        CHECK(std::log(grid.ridge[k - 1].lambda / grid.ridge[k].lambda) == doctest::Approx(0.1).epsilon(1e-9));
    }
}

TEST_CASE("recheck flags a tampered grid")
{
    const DataSet d = testing::gaussian_dataset(100, 150, 6);
    const GridConfig cfg;
    LambdaGrid grid = build_grid(d, cfg, build_ridge_cache(d));
    grid.ridge.push_back({1e-8, 99.0, true});
    const GridRecheck r = recheck_grid(d, grid, cfg, RecheckMode::Recorded);
    CHECK_FALSE(r.ok);
    CHECK(r.violations == 1);
    CHECK_FALSE(recheck_grid(d, grid, cfg, RecheckMode::Refit).ok);
}

TEST_CASE("run_hede: outputs and internal consistency")
{
    SimConfig sc;
    sc.n = 200;
    sc.p = 400;
    sc.seed = 8;
    const auto sim = simulate_dataset(sc);
    const HedeResult res = run_hede_detailed(sim.data);
    const auto& e = res.estimate;
    CHECK_UNARY(e.h2 >= 0.0);
    CHECK_UNARY(e.h2 <= 1.0);
    CHECK(e.h2 == clamp_unit(e.raw_numerator / e.sample_var_y));
    CHECK(e.sample_var_y == sample_variance(sim.data.y()));
    CHECK(e.choice.alpha_L == select_alpha(res.selected_taus));
    CHECK(e.choice.tau_C2_min == ensemble_tau(res.selected_taus, e.choice.alpha_L));
    CHECK(e.raw_numerator == doctest::Approx(e.choice.beta_C_debiased.squaredNorm() - 400.0 * e.choice.tau_C2_min));
    CHECK(res.pairs_evaluated == res.grid.retained_lasso().size() * res.grid.retained_ridge().size());

    // The selected pair is the argmin over every admissible pair.
    const auto cache = build_ridge_cache(sim.data);
    const AdmissibleFits fits = build_admissible_fits(sim.data, GridConfig{}, cache);
    double best = 1e300;
    for (const auto& l : fits.lasso)
        for (const auto& r : fits.ridge) {
            const TauEstimates t = estimate_taus(l, r, 200);
            best = std::min(best, ensemble_tau(t, select_alpha(t)));
        }
    CHECK(e.choice.tau_C2_min == doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("run_hede: pure noise stays near zero")
{
    SimConfig sc;
    sc.n = 400;
    sc.p = 800;
    sc.h2 = 0.0;
    double total = 0.0;
    for (std::uint64_t r = 0; r < 25; ++r) {
        sc.seed = 1000 + r;
        total += run_hede(simulate_dataset(sc).data).h2;
    }
    CHECK(total / 25.0 <= 0.05);
}

TEST_CASE("run_hede: noiseless data with p < n is near one")
{
    SimConfig sc;
    sc.n = 300;
    sc.p = 100;
    sc.h2 = 0.5;
    sc.kappa = 0.5;
    sc.noise_sigma2 = 0.0;
    sc.seed = 3;
    const auto sim = simulate_dataset(sc);
    CHECK(sim.h2_realized == 1.0);
    CHECK(run_hede(sim.data).h2 >= 0.95);
}

TEST_CASE("run_hede: scale equivariance")
{
    SimConfig sc;
    sc.n = 250;
    sc.p = 500;
    sc.seed = 12;
    const DataSet d = simulate_dataset(sc).data;
    const double base = run_hede(d).h2;
    // A power-of-two scale is exact in floating point.
    CHECK(run_hede(d.with_response(4.0 * d.y())).h2 == base);
    CHECK(std::abs(run_hede(d.with_response(3.0 * d.y())).h2 - base) <= 0.02);
    CHECK(std::abs(run_hede(d.with_response(0.37 * d.y())).h2 - base) <= 0.02);
}

TEST_CASE("run_hede: total on awkward inputs")
{
    SUBCASE("single column")
    {
        const DataSet d = testing::gaussian_dataset(50, 1, 20);
        try {
            const double h2 = run_hede(d).h2;
            CHECK_UNARY(h2 >= 0.0);
            CHECK_UNARY(h2 <= 1.0);
        } catch (const EmptyGrid&) {
        }
    }
    SUBCASE("duplicated columns")
    {
        const DataSet base = testing::gaussian_dataset(80, 60, 21);
        Matrix X(80, 120);
        X << base.X(), base.X();
        const double h2 = run_hede(DataSet(base.y(), X)).h2;
        CHECK_UNARY(h2 >= 0.0);
        CHECK_UNARY(h2 <= 1.0);
    }
}
