#include "hede/tau_estimation.hpp"

#include "hede/debias.hpp"
#include "hede/errors.hpp"

namespace hede {

TauEstimates taus_from_gram(double rr_L, double rr_R, double rr_LR, double df_L, double df_R,
                            std::size_t n)
{
    require_residual_df(df_L, n);
    require_residual_df(df_R, n);
    const double slack_L = static_cast<double>(n) - df_L;
    const double slack_R = static_cast<double>(n) - df_R;
    return {rr_L / (slack_L * slack_L), rr_R / (slack_R * slack_R), rr_LR / (slack_L * slack_R)};
}

TauEstimates estimate_taus(const FitResult& fit_L, const FitResult& fit_R, std::size_t n)
{
    const auto rows = static_cast<Eigen::Index>(n);
    if (fit_L.residual.size() != rows || fit_R.residual.size() != rows) {
        throw DimensionMismatch("residual length differs from n");
    }
    return taus_from_gram(fit_L.residual.squaredNorm(), fit_R.residual.squaredNorm(),
                          fit_L.residual.dot(fit_R.residual), fit_L.df_hat, fit_R.df_hat, n);
}

} // namespace hede
