#include "hede/solvers.hpp"

#include "hede/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace hede {

double RidgePathCache::degrees_of_freedom(double lambda_R) const
{
    double df = 0.0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        const double s2 = singular_values(i) * singular_values(i);
        df += s2 / (s2 + lambda_R);
    }
    return df;
}

double lasso_objective(const DataSet& data, const Vector& b, double lambda_L)
{
    const double n = static_cast<double>(data.n());
    const Vector r = data.y() - data.X() * b;
    return r.squaredNorm() / (2.0 * n) + lambda_L / std::sqrt(n) * b.lpNorm<1>();
}

LassoSolver::LassoSolver(const DataSet& data, LassoConfig cfg)
    : data_(data), cfg_(cfg), col_sq_norms_(data.X().colwise().squaredNorm().transpose())
{
    if (!(cfg_.tol > 0.0)) throw InvalidArgument("LassoConfig.tol must be > 0");
    if (cfg_.max_iters < 1) throw InvalidArgument("LassoConfig.max_iters must be >= 1");
}

double LassoSolver::lambda_max() const
{
    const double n = static_cast<double>(data_.n());
    return (data_.X().transpose() * data_.y()).cwiseAbs().maxCoeff() / std::sqrt(n);
}

FitResult LassoSolver::solve(double lambda_L, const Vector* init) const
{
    if (!(lambda_L > 0.0) || !std::isfinite(lambda_L)) {
        throw InvalidArgument("lambda_L must be a positive finite number");
    }
    const auto& X = data_.X();
    const auto p = X.cols();
    const double n = static_cast<double>(data_.n());
    const double threshold = std::sqrt(n) * lambda_L;

    Vector b = Vector::Zero(p);
    if (init != nullptr) {
        if (init->size() != p) throw DimensionMismatch("Lasso init has wrong length");
        b = *init;
    }
    Vector r = data_.y() - X * b;

    FitResult fit;
    fit.lambda = lambda_L;
    fit.penalty_kind = PenaltyKind::L1;

    // One coordinate update; returns |change|.
    auto update = [&](Eigen::Index j) {
        const double xx = col_sq_norms_(j);
        if (xx <= 0.0) return 0.0;
        const double old = b(j);
        const double grad = X.col(j).dot(r) + xx * old;
        const double fresh = soft_threshold(grad, threshold) / xx;
        if (fresh == old) return 0.0;
        r.noalias() -= (fresh - old) * X.col(j);
        b(j) = fresh;
        return std::abs(fresh - old);
    };

    // Coefficient scale |x_j'y| / n floors the relative test, so a solution
    // made of rounding-level entries (lambda at lambda_max) still terminates.
    const double scale_floor = 1e-6 * (X.transpose() * data_.y()).cwiseAbs().maxCoeff() / n;
    auto converged = [&](double max_change) {
        return max_change == 0.0 || max_change <= cfg_.tol * std::max(b.cwiseAbs().maxCoeff(), scale_floor);
    };

    std::vector<Eigen::Index> active;
    std::size_t sweeps = 0;
    double last_change = 0.0;
    while (true) {
        // Full sweep: doubles as the KKT check for zero coordinates.
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) max_change = std::max(max_change, update(j));
        ++sweeps;
        last_change = max_change;
        if (cfg_.record_objective) fit.objective_trace.push_back(lasso_objective(data_, b, lambda_L));
        if (converged(max_change)) break;
        if (sweeps >= cfg_.max_iters) throw NotConverged("lasso coordinate descent", sweeps, last_change);

        active.clear();
        for (Eigen::Index j = 0; j < p; ++j) {
            if (b(j) != 0.0) active.push_back(j);
        }
        while (true) {
            double active_change = 0.0;
            for (auto j : active) active_change = std::max(active_change, update(j));
            ++sweeps;
            last_change = active_change;
            if (cfg_.record_objective) fit.objective_trace.push_back(lasso_objective(data_, b, lambda_L));
            if (converged(active_change)) break;
            if (sweeps >= cfg_.max_iters) throw NotConverged("lasso coordinate descent", sweeps, last_change);
        }
        // Refresh the residual so rounding drift does not accumulate.
        r = data_.y() - X * b;
    }

    fit.iterations = sweeps;
    fit.residual = data_.y() - X * b;
    fit.df_hat = static_cast<double>((b.array() != 0.0).count());
    fit.beta_hat = std::move(b);
    return fit;
}

FitResult fit_lasso(const DataSet& data, double lambda_L, const LassoConfig& cfg)
{
    return LassoSolver(data, cfg).solve(lambda_L, nullptr);
}

FitResult fit_lasso(const DataSet& data, double lambda_L, const LassoConfig& cfg, const Vector& init)
{
    return LassoSolver(data, cfg).solve(lambda_L, &init);
}

std::vector<FitResult> fit_lasso_path(const DataSet& data, std::span<const double> lambdas,
                                      const LassoConfig& cfg)
{
    LassoSolver solver(data, cfg);
    std::vector<FitResult> path;
    path.reserve(lambdas.size());
    for (double lambda : lambdas) {
        const Vector* init = (cfg.warm_start && !path.empty()) ? &path.back().beta_hat : nullptr;
        path.push_back(solver.solve(lambda, init));
    }
    return path;
}

RidgePathCache build_ridge_cache(const DataSet& data)
{
    const double n = static_cast<double>(data.n());
    const Matrix scaled = data.X() / std::sqrt(n);
    Eigen::BDCSVD<Matrix> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw Error(Error::Category::Numerical, "singular value decomposition failed");
    }

    RidgePathCache cache;
    cache.singular_values = svd.singularValues();
    cache.left_factors = svd.matrixU();
    cache.right_factors = svd.matrixV();
    cache.projected_response = cache.left_factors.transpose() * data.y() / std::sqrt(n);
    return cache;
}

FitResult fit_ridge(const DataSet& data, double lambda_R, const RidgePathCache& cache)
{
    if (!(lambda_R > 0.0) || !std::isfinite(lambda_R)) {
        throw InvalidArgument("lambda_R must be a positive finite number");
    }
    const auto rank = cache.singular_values.size();
    if (cache.left_factors.rows() != static_cast<Eigen::Index>(data.n())
        || cache.right_factors.rows() != static_cast<Eigen::Index>(data.p())
        || cache.left_factors.cols() != rank || cache.right_factors.cols() != rank
        || cache.projected_response.size() != rank) {
        throw DimensionMismatch("ridge cache was built for a different design");
    }

    const auto& s = cache.singular_values.array();
    const Vector shrunk = (s / (s.square() + lambda_R)).matrix().cwiseProduct(cache.projected_response);

    FitResult fit;
    fit.lambda = lambda_R;
    fit.penalty_kind = PenaltyKind::L2;
    fit.beta_hat = cache.right_factors * shrunk;
    fit.df_hat = cache.degrees_of_freedom(lambda_R);
    fit.residual = data.y() - data.X() * fit.beta_hat;
    return fit;
}

} // namespace hede
