#include "hede/state_evolution.hpp"

#include "hede/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

namespace hede {
namespace {

constexpr double kScalarLow = 1e-6;
constexpr double kScalarHigh = 1e3;

double norm_pdf(double x)
{
    return std::exp(-0.5 * x * x) * boost::math::constants::one_div_root_two_pi<double>();
}

double norm_cdf(double x)
{
    return 0.5 * boost::math::erfc(-x * boost::math::constants::one_div_root_two<double>());
}

double norm_sf(double x) { return norm_cdf(-x); }

template <class F>
double bracketed_root(F f, double lo, double hi, const std::string& what)
{
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) throw NoBracket(what);
    std::uintmax_t iters = 300;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                    boost::math::tools::eps_tolerance<double>(50), iters);
    if (iters >= 300) throw NotConverged(what, iters, b - a);
    return 0.5 * (a + b);
}

/// E over the prior of f(b); Gaussian components through Gauss-Hermite.
template <class F>
double prior_expectation(const SignalPrior& prior, const GaussHermiteRule& rule, F f)
{
    double total = 0.0;
    for (const auto& atom : prior.atoms()) total += atom.weight * f(atom.value);
    for (const auto& g : prior.gaussians()) {
        const double sd = std::sqrt(g.variance);
        double inner = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) inner += rule.weights[k] * f(sd * rule.nodes[k]);
        total += g.weight * inner;
    }
    return total;
}

struct PriorMoments
{
    double mse = 0.0;
    double p_active = 0.0;
};

PriorMoments lasso_moments(const SignalPrior& prior, const GaussHermiteRule& rule, double t, double theta)
{
    PriorMoments out;
    out.mse = prior_expectation(prior, rule, [&](double b) { return soft_threshold_moments(b, t, theta).mse; });
    out.p_active = prior_expectation(prior, rule,
                                     [&](double b) { return soft_threshold_moments(b, t, theta).p_active; });
    return out;
}

/// For fixed threshold ratio a = theta / t, solve t^2 = sigma2 + delta E mse.
double lasso_t2_for_ratio(double delta, double sigma2, const SignalPrior& prior, const GaussHermiteRule& rule,
                          double ratio)
{
    auto g = [&](double s) {
        const double t = std::sqrt(s);
        return sigma2 + delta * lasso_moments(prior, rule, t, ratio * t).mse - s;
    };
    const double lo = sigma2;
    double hi = std::max(2.0 * sigma2, sigma2 + delta * prior.second_moment() + sigma2);
    for (int k = 0; g(hi) >= 0.0; ++k) {
        if (k > 200) throw NoBracket("Lasso t^2 at threshold ratio " + std::to_string(ratio));
        hi *= 2.0;
    }
    if (g(lo) <= 0.0) return lo;
    return bracketed_root(g, lo, hi, "Lasso t^2");
}

/// Unit-scale null mse: E[eta(Z; a)^2].
double null_unit_mse(double a) { return 2.0 * (1.0 + a * a) * norm_cdf(-a) - 2.0 * a * norm_pdf(a); }

} // namespace

SignalPrior::SignalPrior(std::vector<Atom> atoms, std::vector<GaussianComponent> gaussians)
    : atoms_(std::move(atoms)), gaussians_(std::move(gaussians))
{
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!(a.weight >= 0.0) || !std::isfinite(a.value)) throw InvalidArgument("bad prior atom");
        total += a.weight;
    }
    for (const auto& g : gaussians_) {
        if (!(g.weight >= 0.0) || !(g.variance >= 0.0) || !std::isfinite(g.variance)) {
            throw InvalidArgument("bad Gaussian prior component");
        }
        total += g.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("prior weights sum to " + std::to_string(total));
}

SignalPrior SignalPrior::point_mass_zero() { return SignalPrior({{0.0, 1.0}}, {}); }

SignalPrior SignalPrior::from_coefficients(const Vector& beta, std::size_t n)
{
    if (beta.size() == 0) throw InvalidArgument("empty coefficient vector");
    const double scale = std::sqrt(static_cast<double>(n));
    const double w = 1.0 / static_cast<double>(beta.size());
    std::map<double, std::size_t> counts;
    for (double v : beta) ++counts[scale * v];
    std::vector<Atom> atoms;
    atoms.reserve(counts.size());
    for (const auto& [value, count] : counts) atoms.push_back({value, w * static_cast<double>(count)});
    double total = 0.0;
    for (const auto& a : atoms) total += a.weight;
    atoms.back().weight += 1.0 - total;
    return SignalPrior(std::move(atoms), {});
}

SignalPrior SignalPrior::zero_inflated_normal(double kappa, double sigma_beta2, double delta)
{
    if (!(kappa > 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in (0, 1]");
    if (!(sigma_beta2 >= 0.0) || !(delta > 0.0)) throw InvalidArgument("bad zero-inflated prior");
    std::vector<Atom> atoms;
    if (kappa < 1.0) atoms.push_back({0.0, 1.0 - kappa});
    return SignalPrior(std::move(atoms), {{kappa, sigma_beta2 / (delta * kappa)}});
}

double SignalPrior::second_moment() const noexcept
{
    double m2 = 0.0;
    for (const auto& a : atoms_) m2 += a.weight * a.value * a.value;
    for (const auto& g : gaussians_) m2 += g.weight * g.variance;
    return m2;
}

GaussHermiteRule gauss_hermite(std::size_t nodes)
{
    if (nodes < 1) throw InvalidArgument("Gauss-Hermite needs at least one node");
    const auto m = static_cast<Eigen::Index>(nodes);
    Matrix J = Matrix::Zero(m, m);
    for (Eigen::Index k = 1; k < m; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(J);
    GaussHermiteRule rule;
    rule.nodes.resize(nodes);
    rule.weights.resize(nodes);
    for (Eigen::Index k = 0; k < m; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = eig.eigenvalues()(k);
        const double v = eig.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = v * v;
    }
    // Symmetrize: the rule is exactly symmetric about zero.
    for (std::size_t k = 0; k < nodes / 2; ++k) {
        const std::size_t j = nodes - 1 - k;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[k]);
        const double w = 0.5 * (rule.weights[j] + rule.weights[k]);
        rule.nodes[k] = -x;
        rule.nodes[j] = x;
        rule.weights[k] = rule.weights[j] = w;
    }
    if (nodes % 2 == 1) rule.nodes[nodes / 2] = 0.0;
    return rule;
}

SoftThresholdMoments soft_threshold_moments(double b, double t, double theta)
{
    SoftThresholdMoments out;
    if (!(t > 0.0)) {
        const double eta = b > theta ? b - theta : (b < -theta ? b + theta : 0.0);
        out.mse = (eta - b) * (eta - b);
        out.bias = eta - b;
        out.p_active = std::abs(b) > theta ? 1.0 : 0.0;
        return out;
    }
    const double a1 = (theta - b) / t;
    const double a2 = (-theta - b) / t;
    const double phi1 = norm_pdf(a1), phi2 = norm_pdf(a2);
    const double Q1 = norm_sf(a1), P2 = norm_cdf(a2);
    const double mid = std::max(0.0, norm_cdf(a1) - P2);

    const double upper = t * t * (a1 * phi1 + Q1) - 2.0 * t * theta * phi1 + theta * theta * Q1;
    const double lower = t * t * (P2 - a2 * phi2) - 2.0 * t * theta * phi2 + theta * theta * P2;
    out.mse = upper + lower + b * b * mid;
    out.bias = t * phi1 - theta * Q1 - t * phi2 + theta * P2 - b * mid;
    out.p_active = Q1 + P2;
    return out;
}

double null_soft_threshold_mse(double t, double theta)
{
    const double r = theta / t;
    return 2.0 * (t * t + theta * theta) * norm_cdf(-r) - 2.0 * t * theta * norm_pdf(r);
}

double FixedPointSolution::tau_L(std::size_t n) const { return std::sqrt(n_tau_L2 / static_cast<double>(n)); }
double FixedPointSolution::tau_R(std::size_t n) const { return std::sqrt(n_tau_R2 / static_cast<double>(n)); }

LassoMargin solve_lasso_margin(double delta, double sigma2, const SignalPrior& prior, double lambda_L,
                               std::size_t quad_nodes)
{
    if (!(delta > 0.0) || !(sigma2 > 0.0)) throw InvalidArgument("state evolution needs delta > 0 and sigma2 > 0");
    if (!(lambda_L > 0.0) || !std::isfinite(lambda_L)) throw InvalidArgument("lambda_L must be positive");
    if (quad_nodes < 20) throw InvalidArgument("quad_nodes must be at least 20");
    const GaussHermiteRule rule = gauss_hermite(quad_nodes);

    struct Eval
    {
        double t2, zeta, p_active, lambda;
    };
    auto evaluate = [&](double ratio) {
        const double t2 = lasso_t2_for_ratio(delta, sigma2, prior, rule, ratio);
        const double t = std::sqrt(t2);
        const auto m = lasso_moments(prior, rule, t, ratio * t);
        const double zeta = 1.0 - delta * m.p_active;
        return Eval{t2, zeta, m.p_active, ratio * t * zeta};
    };

    // Smallest admissible threshold ratio: below it t^2 has no finite solution.
    double ratio_min = 0.0;
    if (delta >= 1.0) {
        ratio_min = bracketed_root([&](double a) { return delta * null_unit_mse(a) - 1.0; }, 0.0, 40.0,
                                   "Lasso minimal threshold ratio");
    }
    double lo = ratio_min;
    if (delta >= 1.0) {
        double gap = 1e-3 * std::max(1.0, ratio_min);
        lo = ratio_min + gap;
        while (evaluate(lo).lambda >= lambda_L) {
            gap *= 0.5;
            if (gap < 1e-12 * std::max(1.0, ratio_min)) throw NoBracket("Lasso threshold ratio (lower end)");
            lo = ratio_min + gap;
        }
    }
    double hi = 2.0;
    for (int k = 0; evaluate(hi).lambda <= lambda_L; ++k) {
        if (k > 60) throw NoBracket("Lasso threshold ratio (upper end)");
        hi *= 2.0;
    }
    const double ratio = bracketed_root([&](double a) { return evaluate(a).lambda - lambda_L; }, lo, hi,
                                        "Lasso threshold calibration");
    const Eval e = evaluate(ratio);
    return {e.t2, e.zeta, e.p_active, ratio};
}

RidgeMargin solve_ridge_margin(double delta, double sigma2, const SignalPrior& prior, double lambda_R)
{
    if (!(delta > 0.0) || !(sigma2 > 0.0)) throw InvalidArgument("state evolution needs delta > 0 and sigma2 > 0");
    if (!(lambda_R > 0.0) || !std::isfinite(lambda_R)) throw InvalidArgument("lambda_R must be positive");
    const double s = lambda_R - 1.0 + delta;
    const double zeta = 0.5 * (-s + std::sqrt(s * s + 4.0 * lambda_R));
    const double c = zeta / (zeta + lambda_R);
    const double t2 = (sigma2 + delta * (1.0 - c) * (1.0 - c) * prior.second_moment()) / (1.0 - delta * c * c);
    return {t2, zeta, c};
}

double cross_moment(const SignalPrior& prior, const LassoMargin& lasso, const RidgeMargin& ridge, double rho,
                    std::size_t quad_nodes)
{
    const GaussHermiteRule rule = gauss_hermite(quad_nodes);
    const double t_L = std::sqrt(lasso.t2);
    const double t_R = std::sqrt(ridge.t2);
    const double theta = lasso.threshold_ratio * t_L;
    const double c = ridge.df_frac;
    const double b_bias = prior_expectation(prior, rule, [&](double b) {
        return b * soft_threshold_moments(b, t_L, theta).bias;
    });
    const double p_active = prior_expectation(prior, rule, [&](double b) {
        return soft_threshold_moments(b, t_L, theta).p_active;
    });
    return (c - 1.0) * b_bias + c * t_L * t_R * rho * p_active;
}

double cross_moment_tensor(const SignalPrior& prior, const LassoMargin& lasso, const RidgeMargin& ridge,
                           double rho, std::size_t tensor_nodes, std::size_t quad_nodes)
{
    const GaussHermiteRule outer = gauss_hermite(quad_nodes);
    const GaussHermiteRule grid = gauss_hermite(tensor_nodes);
    const double t_L = std::sqrt(lasso.t2);
    const double t_R = std::sqrt(ridge.t2);
    const double theta = lasso.threshold_ratio * t_L;
    const double c = ridge.df_frac;
    const double orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    return prior_expectation(prior, outer, [&](double b) {
        double total = 0.0;
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            const double z = grid.nodes[i];
            const double v = b + t_L * z;
            const double eta_L = v > theta ? v - theta : (v < -theta ? v + theta : 0.0);
            double inner = 0.0;
            for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
                const double z_R = rho * z + orth * grid.nodes[j];
                inner += grid.weights[j] * (c * (b + t_R * z_R) - b);
            }
            total += grid.weights[i] * (eta_L - b) * inner;
        }
        return total;
    });
}

FixedPointSolution solve_joint_fixed_point(double delta, double sigma2, const SignalPrior& prior,
                                           double lambda_L, double lambda_R, std::size_t quad_nodes)
{
    const LassoMargin lasso = solve_lasso_margin(delta, sigma2, prior, lambda_L, quad_nodes);
    const RidgeMargin ridge = solve_ridge_margin(delta, sigma2, prior, lambda_R);

    // The cross equation is affine in rho: t_L t_R rho = sigma2 + delta (A + B rho).
    const double t_L = std::sqrt(lasso.t2);
    const double t_R = std::sqrt(ridge.t2);
    const double A = cross_moment(prior, lasso, ridge, 0.0, quad_nodes);
    const double B = cross_moment(prior, lasso, ridge, 1.0, quad_nodes) - A;
    const double denom = t_L * t_R - delta * B;
    if (!(std::abs(denom) > 0.0)) throw NoBracket("cross term is degenerate");
    const double rho = (sigma2 + delta * A) / denom;

    FixedPointSolution sol;
    sol.n_tau_L2 = lasso.t2;
    sol.n_tau_R2 = ridge.t2;
    sol.rho = rho;
    sol.zeta_L = lasso.zeta;
    sol.zeta_R = ridge.zeta;
    sol.df_L_frac = lasso.df_frac;
    sol.df_R_frac = ridge.df_frac;
    sol.threshold_ratio = lasso.threshold_ratio;
    return sol;
}

std::array<double, 7> fixed_point_residuals(const FixedPointSolution& sol, double delta, double sigma2,
                                            const SignalPrior& prior, double lambda_L, double lambda_R,
                                            std::size_t quad_nodes)
{
    const GaussHermiteRule rule = gauss_hermite(quad_nodes);
    const double t_L = std::sqrt(sol.n_tau_L2);
    const double t_R = std::sqrt(sol.n_tau_R2);
    const double theta = sol.threshold_ratio * t_L;
    const auto m = lasso_moments(prior, rule, t_L, theta);
    const double c = sol.zeta_R / (sol.zeta_R + lambda_R);
    const double ridge_mse = (1.0 - c) * (1.0 - c) * prior.second_moment() + c * c * sol.n_tau_R2;

    const LassoMargin lasso{sol.n_tau_L2, sol.zeta_L, sol.df_L_frac, sol.threshold_ratio};
    const RidgeMargin ridge{sol.n_tau_R2, sol.zeta_R, c};
    const double cross = cross_moment(prior, lasso, ridge, sol.rho, quad_nodes);

    return {
        (sol.n_tau_L2 - sigma2 - delta * m.mse) / sol.n_tau_L2,
        sol.zeta_L - (1.0 - delta * m.p_active),
        (theta * sol.zeta_L - lambda_L) / lambda_L,
        (sol.n_tau_R2 - sigma2 - delta * ridge_mse) / sol.n_tau_R2,
        sol.zeta_R - (1.0 - delta * c),
        sol.df_R_frac - c,
        (t_L * t_R * sol.rho - sigma2 - delta * cross) / (t_L * t_R),
    };
}

double ridge_scalar_objective(double alpha, double tau, double delta, double sigma2, double sigma_beta2,
                              double lambda_R)
{
    const double d = alpha + tau * lambda_R;
    return alpha * sigma2 / (2.0 * tau) + alpha * tau / 2.0 - alpha * alpha / 2.0
           - alpha * alpha * tau * delta / (2.0 * d) + alpha * lambda_R * sigma_beta2 / (2.0 * d);
}

std::array<double, 2> ridge_scalar_gradient(double alpha, double tau, double delta, double sigma2,
                                            double sigma_beta2, double lambda_R)
{
    const double l = lambda_R;
    const double d = alpha + tau * l;
    const double d2 = d * d;
    const double g_alpha = sigma2 / (2.0 * tau) + tau / 2.0 - alpha
                           - tau * delta * (alpha * alpha + 2.0 * alpha * tau * l) / (2.0 * d2)
                           + l * l * tau * sigma_beta2 / (2.0 * d2);
    const double g_tau = -alpha * sigma2 / (2.0 * tau * tau) + alpha / 2.0
                         - alpha * alpha * alpha * delta / (2.0 * d2)
                         - alpha * l * l * sigma_beta2 / (2.0 * d2);
    return {g_alpha, g_tau};
}

RidgeScalarSolution solve_ridge_scalar(double delta, double sigma2, double sigma_beta2, double lambda_R)
{
    if (!(delta > 0.0) || !(sigma2 > 0.0) || !(sigma_beta2 >= 0.0) || !(lambda_R > 0.0)) {
        throw InvalidArgument("ridge scalar problem needs delta, sigma2, lambda_R > 0 and sigma_beta2 >= 0");
    }
    const std::string inputs = "(delta=" + std::to_string(delta) + ", sigma2=" + std::to_string(sigma2)
                               + ", sigma_beta2=" + std::to_string(sigma_beta2)
                               + ", lambda=" + std::to_string(lambda_R) + ")";
    // psi is convex in tau: its tau-derivative, divided by alpha / 2, is increasing.
    auto inner = [&](double alpha, double tau) {
        const double d = alpha + tau * lambda_R;
        return 1.0 - sigma2 / (tau * tau) - (alpha * alpha * delta + lambda_R * lambda_R * sigma_beta2) / (d * d);
    };
    auto tau_of = [&](double alpha) {
        return bracketed_root([&](double tau) { return inner(alpha, tau); }, kScalarLow, kScalarHigh,
                              "ridge scalar tau " + inputs);
    };
    auto outer = [&](double alpha) {
        return ridge_scalar_gradient(alpha, tau_of(alpha), delta, sigma2, sigma_beta2, lambda_R)[0];
    };
    // Large alpha can push the inner root past the interval; pull the outer end in.
    double alpha_hi = kScalarHigh;
    while (!(inner(alpha_hi, kScalarHigh) > 0.0)) {
        alpha_hi *= 0.5;
        if (alpha_hi < kScalarLow) throw NoBracket("ridge scalar tau " + inputs);
    }
    RidgeScalarSolution sol;
    sol.alpha_star = bracketed_root(outer, kScalarLow, alpha_hi, "ridge scalar alpha " + inputs);
    sol.tau_star = tau_of(sol.alpha_star);
    const auto g = ridge_scalar_gradient(sol.alpha_star, sol.tau_star, delta, sigma2, sigma_beta2, lambda_R);
    sol.grad_alpha = g[0];
    sol.grad_tau = g[1];
    return sol;
}

} // namespace hede
