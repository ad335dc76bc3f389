#pragma once

#include "hede/core_model.hpp"

#include <array>
#include <cstddef>
#include <vector>

// Fixed-point oracle for Gaussian designs. Everything here works in the
// sqrt(n)-scaled coordinates b = sqrt(n) beta, t = sqrt(n) tau, with
// delta = p / n, so that t^2 = n tau^2 is O(1).

namespace hede {

/// Empirical law of b = sqrt(n) beta_j: point masses plus centered Gaussian
/// components. Weights sum to one.
class SignalPrior
{
public:
    struct Atom
    {
        double value;
        double weight;
    };
    struct GaussianComponent
    {
        double weight;
        double variance;
    };

    SignalPrior(std::vector<Atom> atoms, std::vector<GaussianComponent> gaussians);

    static SignalPrior point_mass_zero();
    /// Atoms sqrt(n) beta_j with weight 1/p (duplicates merged).
    static SignalPrior from_coefficients(const Vector& beta, std::size_t n);
    /// 0 w.p. 1 - kappa, N(0, sigma_beta2 / (delta kappa)) w.p. kappa; E b^2 = sigma_beta2 / delta,
    /// i.e. ||beta||^2 = sigma_beta2 on average.
    static SignalPrior zero_inflated_normal(double kappa, double sigma_beta2, double delta);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<GaussianComponent>& gaussians() const noexcept { return gaussians_; }
    /// E b^2 (exact).
    double second_moment() const noexcept;

private:
    std::vector<Atom> atoms_;
    std::vector<GaussianComponent> gaussians_;
};

/// Probabilists' Gauss-Hermite rule (weight exp(-x^2/2)/sqrt(2 pi)), from
/// the Golub-Welsch eigenproblem. Weights sum to one.
struct GaussHermiteRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(std::size_t nodes);

/// Moments of the soft-threshold error eta(b + tZ; theta) - b, Z ~ N(0, 1).
struct SoftThresholdMoments
{
    double mse = 0.0;       // E[(eta - b)^2]
    double bias = 0.0;      // E[eta - b]
    double p_active = 0.0;  // P(|b + tZ| > theta) = E[eta']
};
SoftThresholdMoments soft_threshold_moments(double b, double t, double theta);

/// E[eta(tZ; theta)^2] = 2(t^2 + theta^2) Phi(-theta/t) - 2 t theta phi(theta/t).
double null_soft_threshold_mse(double t, double theta);

struct FixedPointSolution
{
    double n_tau_L2 = 0.0; // n tau_L^2
    double n_tau_R2 = 0.0;
    double rho = 0.0;
    double zeta_L = 1.0;
    double zeta_R = 1.0;
    double df_L_frac = 0.0; // df_L / p
    double df_R_frac = 0.0;
    double threshold_ratio = 0.0; // theta / t on the Lasso margin

    double tau_L(std::size_t n) const;
    double tau_R(std::size_t n) const;
    double df_L(std::size_t p) const { return df_L_frac * static_cast<double>(p); }
    double df_R(std::size_t p) const { return df_R_frac * static_cast<double>(p); }
};

struct LassoMargin
{
    double t2 = 0.0;
    double zeta = 1.0;
    double df_frac = 0.0;
    double threshold_ratio = 0.0;
};

struct RidgeMargin
{
    double t2 = 0.0;
    double zeta = 1.0;
    double df_frac = 0.0; // zeta / (zeta + lambda)
};

/// t^2 = sigma2 + delta E[(eta_soft(b + tZ; theta) - b)^2],
/// zeta = 1 - delta P(active), lambda_L = theta zeta.
LassoMargin solve_lasso_margin(double delta, double sigma2, const SignalPrior& prior, double lambda_L,
                               std::size_t quad_nodes = 61);

/// Closed form of the ridge margin with eta(v) = zeta v / (zeta + lambda_R).
RidgeMargin solve_ridge_margin(double delta, double sigma2, const SignalPrior& prior, double lambda_R);

FixedPointSolution solve_joint_fixed_point(double delta, double sigma2, const SignalPrior& prior,
                                           double lambda_L, double lambda_R,
                                           std::size_t quad_nodes = 61);

/// E[(eta_L(b + t_L Z_L) - b)(eta_R(b + t_R Z_R) - b)] with corr(Z_L, Z_R) = rho,
/// via Stein's identity (exact in rho given the per-atom closed forms).
double cross_moment(const SignalPrior& prior, const LassoMargin& lasso, const RidgeMargin& ridge,
                    double rho, std::size_t quad_nodes = 61);

/// Same expectation by tensor Gauss-Hermite over (Z_L, Z_R).
double cross_moment_tensor(const SignalPrior& prior, const LassoMargin& lasso, const RidgeMargin& ridge,
                           double rho, std::size_t tensor_nodes = 41, std::size_t quad_nodes = 61);

/// Residuals of the seven defining equations, each scaled to O(1):
/// Lasso t^2, Lasso zeta, Lasso lambda calibration, ridge t^2, ridge zeta,
/// ridge df, cross term.
std::array<double, 7> fixed_point_residuals(const FixedPointSolution& sol, double delta, double sigma2,
                                            const SignalPrior& prior, double lambda_L, double lambda_R,
                                            std::size_t quad_nodes = 61);

/// Saddle point of the ridge scalar problem
///   psi(a, t) = a s2/(2t) + a t/2 - a^2/2 - a^2 t delta/(2(a + t l)) + a l sb2/(2(a + t l)),
/// max over a, min over t, both searched on [1e-6, 1e3].
struct RidgeScalarSolution
{
    double alpha_star = 0.0;
    double tau_star = 0.0;
    double grad_alpha = 0.0; // d psi / d alpha at the solution
    double grad_tau = 0.0;
};
double ridge_scalar_objective(double alpha, double tau, double delta, double sigma2, double sigma_beta2,
                              double lambda_R);
std::array<double, 2> ridge_scalar_gradient(double alpha, double tau, double delta, double sigma2,
                                            double sigma_beta2, double lambda_R);
RidgeScalarSolution solve_ridge_scalar(double delta, double sigma2, double sigma_beta2, double lambda_R);

} // namespace hede
