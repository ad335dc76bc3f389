#include "hede/errors.hpp"
#include "hede/solvers.hpp"

#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

using namespace hede;

namespace {

// Largest KKT violation, in units of sqrt(n).
double kkt_violation(const DataSet& d, const Vector& b, double lambda)
{
    const double rn = std::sqrt(static_cast<double>(d.n()));
    const Vector g = d.X().transpose() * (d.y() - d.X() * b);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        const double v = b(j) == 0.0 ? std::max(0.0, std::abs(g(j)) - rn * lambda)
                                     : std::abs(g(j) - rn * lambda * (b(j) > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v / rn);
    }
    return worst;
}

// Accelerated proximal gradient on the same objective, run to stagnation.
Vector fista(const DataSet& d, double lambda, int iters)
{
    const double n = static_cast<double>(d.n());
    const double L = Eigen::SelfAdjointEigenSolver<Matrix>(d.X().transpose() * d.X() / n).eigenvalues().maxCoeff();
    const double step = 1.0 / L;
    Vector b = Vector::Zero(d.X().cols()), z = b;
    double t = 1.0;
    for (int k = 0; k < iters; ++k) {
        const Vector grad = -d.X().transpose() * (d.y() - d.X() * z) / n;
        Vector next = z - step * grad;
        for (Eigen::Index j = 0; j < next.size(); ++j) next(j) = soft_threshold(next(j), step * lambda / std::sqrt(n));
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / t_next) * (next - b);
        b = next;
        t = t_next;
    }
    return b;
}

} // namespace

TEST_CASE("lasso: orthogonal design has the soft-threshold closed form")
{
    const std::size_t n = 40, p = 12;
    const Matrix X = testing::orthogonal_design(n, p, 1);
    Vector theta = testing::gaussian_vector(p, 2);
    const Vector y = X * theta + 0.1 * testing::gaussian_vector(n, 3);
    const DataSet d(y, X);
    const double lambda = 0.8;
    const FitResult fit = fit_lasso(d, lambda, LassoConfig{1e-12, 100000, true, false});
    const Vector z = X.transpose() * y / static_cast<double>(n);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
        CHECK(fit.beta_hat(j) == doctest::Approx(soft_threshold(z(j), lambda / std::sqrt(double(n)))).epsilon(1e-10));
    }
    CHECK(fit.df_hat == static_cast<double>((fit.beta_hat.array() != 0.0).count()));
    CHECK(fit.penalty_kind == PenaltyKind::L1);
}

TEST_CASE("lasso: lambda at or above lambda_max gives the null solution")
{
    const DataSet d = testing::gaussian_dataset(30, 50, 4);
    const LassoSolver solver(d, {});
    const double lmax = solver.lambda_max();
    const double expect = (d.X().transpose() * d.y()).cwiseAbs().maxCoeff() / std::sqrt(30.0);
    CHECK(lmax == doctest::Approx(expect).epsilon(1e-14));
    for (double f : {1.0, 1.01, 10.0}) {
        const FitResult fit = solver.solve(lmax * f, nullptr);
        CHECK(fit.beta_hat.isZero(1e-14));
        CHECK(fit.df_hat <= 1.0);
    }
    CHECK(fit_lasso(d, lmax * 1.000001).df_hat == 0.0);
}

TEST_CASE("lasso: matches an accelerated proximal-gradient oracle on 20 x 30")
{
    const DataSet d = testing::gaussian_dataset(20, 30, 5, 2.0);
    const double lmax = LassoSolver(d, {}).lambda_max();
    for (double f : {0.5, 0.2, 0.05}) {
        const double lambda = f * lmax;
        const FitResult fit = fit_lasso(d, lambda, LassoConfig{1e-12, 100000, true, false});
        const Vector oracle = fista(d, lambda, 20000);
        CHECK(lasso_objective(d, fit.beta_hat, lambda)
              == doctest::Approx(lasso_objective(d, oracle, lambda)).epsilon(1e-8));
        CHECK(lasso_objective(d, fit.beta_hat, lambda) <= lasso_objective(d, oracle, lambda) + 1e-10);
    }
}

TEST_CASE("lasso: stationarity on random instances")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 30 + 10 * seed, p = 20 + 25 * seed;
        const DataSet d = testing::gaussian_dataset(n, p, 100 + seed);
        const double lmax = LassoSolver(d, {}).lambda_max();
        for (double f : {0.7, 0.3, 0.1}) {
            const LassoConfig cfg;
            const FitResult fit = fit_lasso(d, f * lmax, cfg);
            const double scale = std::max(fit.beta_hat.cwiseAbs().maxCoeff(), 1e-3);
            CHECK(kkt_violation(d, fit.beta_hat, f * lmax) <= 1e-5 * scale * std::sqrt(double(n)));
            CHECK((fit.residual - (d.y() - d.X() * fit.beta_hat)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("lasso: objective is monotone across sweeps")
{
    const DataSet d = testing::gaussian_dataset(60, 90, 7);
    const double lambda = 0.2 * LassoSolver(d, {}).lambda_max();
    LassoConfig cfg;
    cfg.record_objective = true;
    const FitResult fit = fit_lasso(d, lambda, cfg);
    REQUIRE(fit.objective_trace.size() >= 2);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
        CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-14 * std::abs(fit.objective_trace[k - 1]));
    }
}

TEST_CASE("lasso: warm-started path equals cold starts")
{
    const DataSet d = testing::gaussian_dataset(80, 120, 8);
    const double lmax = LassoSolver(d, {}).lambda_max();
    std::vector<double> lambdas;
    for (int k = 0; k < 25; ++k) lambdas.push_back(lmax * std::exp(-0.1 * k));
    LassoConfig warm;
    LassoConfig cold;
    cold.warm_start = false;
    const auto a = fit_lasso_path(d, lambdas, warm);
    const auto b = fit_lasso_path(d, lambdas, cold);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double scale = std::max(1.0, a[k].beta_hat.cwiseAbs().maxCoeff());
        CHECK((a[k].beta_hat - b[k].beta_hat).cwiseAbs().maxCoeff() <= 1e-5 * scale);
        CHECK(a[k].df_hat == b[k].df_hat);
    }
}

TEST_CASE("lasso: iteration cap is reported, bad inputs rejected")
{
    const DataSet d = testing::gaussian_dataset(50, 80, 9);
    LassoConfig cfg;
    cfg.max_iters = 1;
    CHECK_THROWS_AS(fit_lasso(d, 0.05 * LassoSolver(d, {}).lambda_max(), cfg), NotConverged);
    CHECK_THROWS_AS(fit_lasso(d, 0.0), InvalidArgument);
    CHECK_THROWS_AS(fit_lasso(d, -1.0), InvalidArgument);
    CHECK_THROWS_AS(fit_lasso(d, 1.0, {}, Vector::Zero(3)), DimensionMismatch);
    cfg.max_iters = 0;
    CHECK_THROWS_AS(LassoSolver(d, cfg), InvalidArgument);
}

TEST_CASE("ridge: isotropic closed form")
{
    const std::size_t n = 30, p = 10;
    const Matrix X = testing::orthogonal_design(n, p, 11);
    const DataSet d(testing::gaussian_vector(n, 12), X);
    const auto cache = build_ridge_cache(d);
    for (double lambda : {0.1, 1.0, 7.0}) {
        const FitResult fit = fit_ridge(d, lambda, cache);
        const Vector expect = X.transpose() * d.y() / (double(n) * (1.0 + lambda));
        CHECK((fit.beta_hat - expect).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(fit.df_hat == doctest::Approx(double(p) / (1.0 + lambda)).epsilon(1e-12));
        CHECK(fit.penalty_kind == PenaltyKind::L2);
    }
}

TEST_CASE("ridge: huge penalty shrinks to zero")
{
    const DataSet d = testing::gaussian_dataset(25, 40, 13);
    const FitResult fit = fit_ridge(d, 1e8, build_ridge_cache(d));
    CHECK(fit.beta_hat.norm() <= (d.X().transpose() * d.y() / 25.0).norm() / 1e8 * (1 + 1e-12));
}

TEST_CASE("ridge: matches a dense solve of the normal equations")
{
    const DataSet d = testing::gaussian_dataset(15, 25, 14);
    const auto cache = build_ridge_cache(d);
    for (double lambda : {0.01, 0.3, 5.0}) {
        const Matrix A = d.X().transpose() * d.X() / 15.0 + lambda * Matrix::Identity(25, 25);
        const Vector direct = A.ldlt().solve(d.X().transpose() * d.y() / 15.0);
        const FitResult fit = fit_ridge(d, lambda, cache);
        CHECK((fit.beta_hat - direct).norm() <= 1e-8 * direct.norm());
    }
}

TEST_CASE("ridge: least-squares limit for p < n")
{
    const DataSet d = testing::gaussian_dataset(50, 10, 15);
    const Vector ls = d.X().colPivHouseholderQr().solve(d.y());
    const FitResult fit = fit_ridge(d, 1e-10, build_ridge_cache(d));
    CHECK((fit.beta_hat - ls).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("ridge: df is strictly decreasing and inside (0, min(n, p))")
{
    const DataSet d = testing::gaussian_dataset(40, 70, 16);
    const auto cache = build_ridge_cache(d);
    double prev = 1e300;
    for (double lambda = 1e-4; lambda < 1e4; lambda *= 1.5) {
        const double df = fit_ridge(d, lambda, cache).df_hat;
        CHECK(df < prev);
        CHECK(df > 0.0);
        CHECK(df < 40.0);
        prev = df;
    }
}

TEST_CASE("ridge: df equals the explicit hat-operator trace")
{
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = 10 + 8 * seed, p = 50 - 7 * seed;
        const DataSet d = testing::gaussian_dataset(n, p, 200 + seed);
        const auto cache = build_ridge_cache(d);
        const Matrix G = d.X().transpose() * d.X() / double(n);
        for (double lambda : {0.05, 0.5, 3.0}) {
            const Matrix I = Matrix::Identity(G.rows(), G.cols());
            const double trace = (G + lambda * I).ldlt().solve(G).trace();
            CHECK(std::abs(cache.degrees_of_freedom(lambda) - trace) <= 1e-8);
        }
    }
}

TEST_CASE("ridge cache")
{
    SUBCASE("zero design")
    {
        const DataSet d(Vector::Ones(6), Matrix::Zero(6, 4));
        CHECK(build_ridge_cache(d).singular_values.isZero());
    }
    SUBCASE("orthonormal design scaled by sqrt(n)")
    {
        const DataSet d(Vector::Ones(20), testing::orthogonal_design(20, 7, 17));
        const auto cache = build_ridge_cache(d);
        CHECK((cache.singular_values.array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("singular values match an eigendecomposition of X'X/n")
    {
        const DataSet d(Vector::Ones(10), testing::gaussian_matrix(10, 8, 18));
        const auto cache = build_ridge_cache(d);
        Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(d.X().transpose() * d.X() / 10.0).eigenvalues();
        std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
        for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(std::abs(cache.singular_values(i) * cache.singular_values(i) - ev(i)) <= 1e-8);
        for (Eigen::Index i = 1; i < ev.size(); ++i) CHECK(cache.singular_values(i) <= cache.singular_values(i - 1));
    }
    SUBCASE("reconstruction and orthonormal factors")
    {
        const DataSet d(Vector::Ones(30), testing::gaussian_matrix(30, 45, 19));
        const auto c = build_ridge_cache(d);
        const Matrix scaled = d.X() / std::sqrt(30.0);
        const Matrix rebuilt = c.left_factors * c.singular_values.asDiagonal() * c.right_factors.transpose();
        CHECK((scaled - rebuilt).norm() <= 1e-7 * scaled.norm());
        const auto k = c.singular_values.size();
        CHECK((c.left_factors.transpose() * c.left_factors - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((c.right_factors.transpose() * c.right_factors - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("cache from another design is rejected")
    {
        const DataSet a(Vector::Ones(10), testing::gaussian_matrix(10, 8, 20));
        const DataSet b(Vector::Ones(12), testing::gaussian_matrix(12, 8, 21));
        CHECK_THROWS_AS(fit_ridge(b, 1.0, build_ridge_cache(a)), DimensionMismatch);
        CHECK_THROWS_AS(fit_ridge(a, 0.0, build_ridge_cache(a)), InvalidArgument);
    }
}
