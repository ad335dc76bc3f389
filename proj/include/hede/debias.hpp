#pragma once

#include "hede/core_model.hpp"

namespace hede {

/// Smallest admissible n - df as a fraction of n.
inline constexpr double kMinResidualDfFraction = 0.005;

/// Throws DegenerateDf unless n - df >= 0.005 n.
void require_residual_df(double df_hat, std::size_t n);

/// Degrees-of-freedom corrected debiasing:
///   beta_d = beta_hat + X'(y - X beta_hat) / (n - df_hat).
FitResult debias_fit(const DataSet& data, FitResult fit);

} // namespace hede
