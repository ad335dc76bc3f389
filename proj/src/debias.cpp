#include "hede/debias.hpp"

#include "hede/errors.hpp"

#include <cmath>

namespace hede {

void require_residual_df(double df_hat, std::size_t n)
{
    const double nn = static_cast<double>(n);
    const double slack = nn - df_hat;
    if (!(df_hat >= 0.0) || !(slack > 0.0) || !(slack >= kMinResidualDfFraction * nn)) {
        throw DegenerateDf(df_hat, n);
    }
}

FitResult debias_fit(const DataSet& data, FitResult fit)
{
    if (fit.beta_hat.size() != static_cast<Eigen::Index>(data.p())
        || fit.residual.size() != static_cast<Eigen::Index>(data.n())) {
        throw DimensionMismatch("fit does not belong to this data set");
    }
    require_residual_df(fit.df_hat, data.n());
    const double slack = static_cast<double>(data.n()) - fit.df_hat;
    fit.beta_debiased = fit.beta_hat + data.X().transpose() * fit.residual / slack;
    return fit;
}

} // namespace hede
