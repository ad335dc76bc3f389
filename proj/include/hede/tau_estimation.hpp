#pragma once

#include "hede/core_model.hpp"

namespace hede {

/// Residual-based variance/covariance of the debiased Lasso and ridge:
///   tau_L2 = |r_L|^2 / (n - df_L)^2,  tau_R2 = |r_R|^2 / (n - df_R)^2,
///   tau_LR = <r_L, r_R> / ((n - df_L)(n - df_R)).
TauEstimates estimate_taus(const FitResult& fit_L, const FitResult& fit_R, std::size_t n);

/// Same estimates from precomputed residual Gram entries, used by the grid
/// loop where the inner products come out of one matrix product.
TauEstimates taus_from_gram(double rr_L, double rr_R, double rr_LR, double df_L, double df_R,
                            std::size_t n);

} // namespace hede
