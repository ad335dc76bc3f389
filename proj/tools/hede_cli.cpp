// hede: heritability estimation from the command line.
//
//   hede estimate  --x X.csv --y y.csv [--blocks FILE|identity] [--out report.json]
//   hede simulate  --config sim.cfg --out-dir DIR
//   hede oracle    --delta 0.5 --sigma2 1 --sigma-beta2 1 --lambda-L 0.3 --lambda-R 0.5
//   hede benchmark --config sweep.cfg [--out results.csv]
//
// Exit codes: 0 ok, 1 bad input, 2 empty tuning grid, 3 numerical failure.

#include "hede/core_model.hpp"
#include "hede/covariance.hpp"
#include "hede/ensemble_selector.hpp"
#include "hede/errors.hpp"
#include "hede/io.hpp"
#include "hede/parallel.hpp"
#include "hede/simulation.hpp"
#include "hede/state_evolution.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kSchema = "hede/1";

int exit_code_for(const hede::Error& e)
{
    switch (e.category()) {
    case hede::Error::Category::Input: return 1;
    case hede::Error::Category::Grid: return 2;
    case hede::Error::Category::Numerical: return 3;
    }
    return 3;
}

void emit(const std::string& text, const std::string& out)
{
    if (out.empty() || out == "-") std::cout << text;
    else hede::io::write_text(out, text);
}

double parse_double(const std::string& key, const std::string& value)
{
    double v = 0.0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end || value.empty()) {
        throw hede::InvalidArgument("config key '" + key + "': not a number: '" + value + "'");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value)
{
    std::uint64_t v = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end || value.empty()) {
        throw hede::InvalidArgument("config key '" + key + "': not a nonnegative integer: '" + value + "'");
    }
    return v;
}

// Raw allele counts with optional missing entries: observed entries are
// standardized with the observed allele frequency, missing ones set to 0
// (the column mean), then every column is rescaled to unit variance.
hede::Matrix ingest_genotypes(const hede::Matrix& G)
{
    if (!G.array().isNaN().any()) return hede::normalize_genotypes(G);
    hede::Matrix X(G.rows(), G.cols());
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
        double sum = 0.0, count = 0.0;
        for (Eigen::Index i = 0; i < G.rows(); ++i) {
            const double v = G(i, j);
            if (std::isnan(v)) continue;
            if (v != 0.0 && v != 1.0 && v != 2.0) {
                throw hede::InvalidArgument("genotype (" + std::to_string(i) + ", " + std::to_string(j)
                                            + ") is not in {0,1,2}");
            }
            sum += v;
            count += 1.0;
        }
        const double freq = count > 0.0 ? sum / (2.0 * count) : 0.0;
        if (freq <= 0.0 || freq >= 1.0) throw hede::ConstantColumn(static_cast<std::size_t>(j));
        const double sd = std::sqrt(2.0 * freq * (1.0 - freq));
        for (Eigen::Index i = 0; i < G.rows(); ++i) {
            X(i, j) = std::isnan(G(i, j)) ? 0.0 : (G(i, j) - 2.0 * freq) / sd;
        }
    }
    return hede::standardize_columns(X);
}

// ---- configuration shared by simulate and benchmark ----

void apply_sim_key(hede::SimConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "n") cfg.n = parse_uint(key, value);
    else if (key == "p") cfg.p = parse_uint(key, value);
    else if (key == "h2") cfg.h2 = parse_double(key, value);
    else if (key == "kappa") cfg.kappa = parse_double(key, value);
    else if (key == "maf_low") cfg.maf_range.first = parse_double(key, value);
    else if (key == "maf_high") cfg.maf_range.second = parse_double(key, value);
    else if (key == "noise_sigma2") cfg.noise_sigma2 = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_uint(key, value);
    else if (key == "ar_rho") cfg.ar_rho = parse_double(key, value);
    else if (key == "ar_block") cfg.ar_block = parse_uint(key, value);
    else if (key == "num_strata") cfg.strat.num_strata = parse_uint(key, value);
    else if (key == "c_low") cfg.strat.c_low = parse_double(key, value);
    else if (key == "c_high") cfg.strat.c_high = parse_double(key, value);
    else if (key == "resample_empty_support") cfg.resample_empty_support = value == "true" || value == "1";
    else if (key == "signal") {
        if (value == "zero_inflated_normal" || value == "zin") cfg.signal_kind = hede::SignalKind::ZeroInflatedNormal;
        else if (value == "stratified_mixture" || value == "stratified") cfg.signal_kind = hede::SignalKind::StratifiedMixture;
        else throw hede::InvalidArgument("unknown signal kind '" + value + "'");
    } else if (key == "design") {
        if (value == "genotype") cfg.design = hede::DesignKind::Genotype;
        else if (value == "gaussian") cfg.design = hede::DesignKind::Gaussian;
        else throw hede::InvalidArgument("unknown design '" + value + "'");
    } else {
        throw hede::InvalidArgument("unknown simulation key '" + key + "'");
    }
}

bool apply_grid_key(hede::GridConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "t_min") cfg.t_min = parse_double(key, value);
    else if (key == "t_max") cfg.t_max = parse_double(key, value);
    else if (key == "log_step") cfg.log_step = parse_double(key, value);
    else return false;
    return true;
}

const char* signal_name(hede::SignalKind k)
{
    return k == hede::SignalKind::ZeroInflatedNormal ? "zero_inflated_normal" : "stratified_mixture";
}

const char* design_name(hede::DesignKind k) { return k == hede::DesignKind::Genotype ? "genotype" : "gaussian"; }

json sim_config_json(const hede::SimConfig& c)
{
    return json{{"n", c.n},
                {"p", c.p},
                {"h2", c.h2},
                {"kappa", c.kappa},
                {"maf_low", c.maf_range.first},
                {"maf_high", c.maf_range.second},
                {"noise_sigma2", c.noise_sigma2},
                {"seed", c.seed},
                {"signal", signal_name(c.signal_kind)},
                {"design", design_name(c.design)},
                {"ar_rho", c.ar_rho},
                {"ar_block", c.ar_block},
                {"num_strata", c.strat.num_strata},
                {"c_low", c.strat.c_low},
                {"c_high", c.strat.c_high}};
}

// ---- estimate ----

struct EstimateArgs
{
    std::string x, y, genotypes, blocks, out;
    hede::GridConfig grid;
    std::uint64_t seed = 0;
    std::optional<int> threads;
    bool timing = false;
};

hede::DataSet prepare(const hede::DataSet& data, const std::string& blocks, bool& whitened)
{
    whitened = false;
    if (blocks.empty() || blocks == "identity") return data;
    const auto spec = hede::BlockSpec::parse(hede::io::read_text(blocks), data.p());
    whitened = true;
    return hede::whiten(data, hede::estimate_block_covariance(data, spec));
}

json grid_json(const hede::LambdaGrid& grid)
{
    auto margin = [](const std::vector<hede::GridPoint>& pts) {
        std::size_t kept = 0;
        for (const auto& pt : pts) kept += pt.retained ? 1 : 0;
        json lambdas = json::array(), dfs = json::array();
        for (const auto& pt : pts) {
            if (!pt.retained) continue;
            lambdas.push_back(pt.lambda);
            dfs.push_back(pt.df);
        }
        return json{{"evaluated", pts.size()}, {"retained", kept}, {"dropped", pts.size() - kept},
                    {"lambda", lambdas}, {"df", dfs}};
    };
    return json{{"lasso", margin(grid.lasso)}, {"ridge", margin(grid.ridge)}};
}

int cmd_estimate(const EstimateArgs& a)
{
    const auto start = std::chrono::steady_clock::now();
    if (a.x.empty() == a.genotypes.empty()) throw hede::InvalidArgument("give exactly one of --x or --genotypes");
    if (const auto t = hede::resolve_thread_request(a.threads)) hede::set_thread_count(*t);

    hede::Vector y = hede::io::read_vector_csv(a.y);
    hede::Matrix X = a.x.empty() ? ingest_genotypes(hede::io::read_matrix_csv(a.genotypes, true))
                                 : hede::io::read_matrix_csv(a.x);
    if (X.rows() != y.size()) {
        throw hede::DimensionMismatch("X has " + std::to_string(X.rows()) + " rows, y has "
                                      + std::to_string(y.size()) + " values");
    }
    bool whitened = false;
    const hede::DataSet data = prepare(hede::DataSet(std::move(y), std::move(X)), a.blocks, whitened);
    const hede::HedeResult res = hede::run_hede_detailed(data, a.grid);
    const auto& est = res.estimate;

    json report;
    report["schema"] = kSchema;
    report["h2"] = est.h2;
    report["alpha_L"] = est.choice.alpha_L;
    report["lambda_L"] = est.choice.lambda_L;
    report["lambda_R"] = est.choice.lambda_R;
    report["tau_C2_min"] = est.choice.tau_C2_min;
    report["raw_numerator"] = est.raw_numerator;
    report["sample_var_y"] = est.sample_var_y;
    report["df_L"] = res.df_L;
    report["df_R"] = res.df_R;
    report["taus"] = {{"tau_L2", res.selected_taus.tau_L2},
                      {"tau_R2", res.selected_taus.tau_R2},
                      {"tau_LR", res.selected_taus.tau_LR}};
    report["grid"] = grid_json(res.grid);
    report["pairs_evaluated"] = res.pairs_evaluated;
    report["pairs_degenerate"] = res.pairs_degenerate;
    report["n"] = data.n();
    report["p"] = data.p();
    report["whitened"] = whitened;
    report["config"] = {{"t_min", a.grid.t_min},
                        {"t_max", a.grid.t_max},
                        {"log_step", a.grid.log_step},
                        {"seed", a.seed},
                        {"blocks", a.blocks.empty() ? "none" : a.blocks}};
    if (a.timing) {
        report["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    emit(report.dump(2) + "\n", a.out);
    return 0;
}

// ---- simulate ----

struct SimulateArgs
{
    std::string config, out_dir;
    std::vector<std::string> sets; // key=value overrides
};

hede::SimConfig load_sim_config(const std::string& path, const std::vector<std::string>& sets)
{
    hede::SimConfig cfg;
    if (!path.empty()) {
        for (const auto& [k, v] : hede::io::parse_key_values(hede::io::read_text(path))) apply_sim_key(cfg, k, v);
    }
    for (const auto& s : sets) {
        for (const auto& [k, v] : hede::io::parse_key_values(s)) apply_sim_key(cfg, k, v);
    }
    cfg.validate();
    return cfg;
}

int cmd_simulate(const SimulateArgs& a)
{
    const hede::SimConfig cfg = load_sim_config(a.config, a.sets);
    const auto sim = hede::simulate_dataset(cfg);
    const fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw hede::InvalidArgument("cannot create " + dir.string());

    hede::io::write_matrix_csv(dir / "X.csv", sim.data.X());
    hede::io::write_vector_csv(dir / "y.csv", sim.data.y());

    std::size_t nonzeros = 0;
    for (double b : sim.truth.beta) nonzeros += b != 0.0 ? 1 : 0;
    json truth;
    truth["schema"] = kSchema;
    truth["config"] = sim_config_json(cfg);
    truth["h2_target"] = cfg.h2;
    truth["h2_true"] = sim.truth.h2_true;
    truth["h2_realized"] = sim.h2_realized;
    truth["sigma2"] = sim.truth.sigma2;
    truth["signal_variance"] = sim.truth.signal_variance();
    truth["nonzeros"] = nonzeros;
    truth["beta"] = std::vector<double>(sim.truth.beta.data(), sim.truth.beta.data() + sim.truth.beta.size());
    hede::io::write_text(dir / "truth.json", truth.dump(2) + "\n");
    return 0;
}

// ---- oracle ----

struct OracleArgs
{
    double delta = 0.5, sigma2 = 1.0, sigma_beta2 = 1.0, kappa = 1.0;
    double lambda_L = 0.0, lambda_R = 0.0;
    std::string beta;
    std::size_t n = 0;
    std::size_t quad_nodes = 61;
    std::string out;
};

int cmd_oracle(const OracleArgs& a)
{
    if (!(a.lambda_L > 0.0) || !(a.lambda_R > 0.0)) throw hede::InvalidArgument("--lambda-L and --lambda-R must be > 0");
    std::optional<hede::SignalPrior> prior;
    double delta = a.delta;
    double sigma_beta2 = a.sigma_beta2;
    if (!a.beta.empty()) {
        if (a.n < 1) throw hede::InvalidArgument("--beta needs --n");
        const hede::Vector beta = hede::io::read_vector_csv(a.beta);
        delta = static_cast<double>(beta.size()) / static_cast<double>(a.n);
        prior = hede::SignalPrior::from_coefficients(beta, a.n);
        sigma_beta2 = beta.squaredNorm();
    } else {
        prior = hede::SignalPrior::zero_inflated_normal(a.kappa, a.sigma_beta2, a.delta);
    }
    const auto sol = hede::solve_joint_fixed_point(delta, a.sigma2, *prior, a.lambda_L, a.lambda_R, a.quad_nodes);
    const auto resid = hede::fixed_point_residuals(sol, delta, a.sigma2, *prior, a.lambda_L, a.lambda_R, a.quad_nodes);
    const auto so = hede::solve_ridge_scalar(delta, a.sigma2, sigma_beta2, a.lambda_R);

    json report;
    report["schema"] = kSchema;
    report["inputs"] = {{"delta", delta},     {"sigma2", a.sigma2},     {"sigma_beta2", sigma_beta2},
                        {"lambda_L", a.lambda_L}, {"lambda_R", a.lambda_R}, {"quad_nodes", a.quad_nodes}};
    report["fixed_point"] = {{"n_tau_L2", sol.n_tau_L2},
                             {"n_tau_R2", sol.n_tau_R2},
                             {"rho", sol.rho},
                             {"zeta_L", sol.zeta_L},
                             {"zeta_R", sol.zeta_R},
                             {"df_L_over_p", sol.df_L_frac},
                             {"df_R_over_p", sol.df_R_frac},
                             {"threshold_ratio", sol.threshold_ratio}};
    report["max_abs_residual"] = [&] {
        double m = 0.0;
        for (double r : resid) m = std::max(m, std::abs(r));
        return m;
    }();
    report["ridge_scalar"] = {{"alpha_star", so.alpha_star},
                              {"tau_star", so.tau_star},
                              {"tau_star2", so.tau_star * so.tau_star},
                              {"grad_alpha", so.grad_alpha},
                              {"grad_tau", so.grad_tau}};
    emit(report.dump(2) + "\n", a.out);
    return 0;
}

// ---- benchmark ----

struct BenchmarkArgs
{
    std::string config, out;
    std::optional<int> threads;
};

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw hede::InvalidArgument("empty item in list '" + value + "'");
        items.push_back(item.substr(first, last - first + 1));
    }
    return items;
}

int cmd_benchmark(const BenchmarkArgs& a)
{
    if (const auto t = hede::resolve_thread_request(a.threads)) hede::set_thread_count(*t);
    const auto kv = hede::io::parse_key_values(hede::io::read_text(a.config));
    if (kv.empty()) throw hede::InvalidArgument("benchmark config " + a.config + " defines no sweep");

    std::size_t replicates = 1;
    std::uint64_t base_seed = 1;
    std::string blocks;
    hede::GridConfig grid;
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& [k, v] : kv) {
        if (k == "replicates") replicates = parse_uint(k, v);
        else if (k == "seed") base_seed = parse_uint(k, v);
        else if (k == "whiten_block") blocks = v;
        else if (apply_grid_key(grid, k, v)) continue;
        else axes.emplace_back(k, split_list(v));
    }
    if (replicates < 1) throw hede::InvalidArgument("replicates must be >= 1");
    grid.validate();

    // Expand the cartesian product (last axis fastest) and validate up front.
    std::vector<hede::SimConfig> scenarios{hede::SimConfig{}};
    for (const auto& [key, values] : axes) {
        std::vector<hede::SimConfig> next;
        for (const auto& base : scenarios) {
            for (const auto& v : values) {
                hede::SimConfig c = base;
                apply_sim_key(c, key, v);
                next.push_back(c);
            }
        }
        scenarios = std::move(next);
    }
    for (const auto& c : scenarios) c.validate();

    std::string csv = "scenario,replicate,h2_true,h2_hat,squared_error,n,p,kappa,h2_target,h2_population,grid_ok,status\n";
    using hede::io::format_double;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        for (std::size_t r = 0; r < replicates; ++r) {
            hede::SimConfig cfg = scenarios[s];
            cfg.seed = base_seed + r;
            std::string row = std::to_string(s) + "," + std::to_string(r) + ",";
            try {
                const auto sim = hede::simulate_dataset(cfg);
                hede::DataSet data = sim.data;
                if (!blocks.empty()) {
                    const auto spec = hede::BlockSpec::parse(blocks, data.p());
                    data = hede::whiten(data, hede::estimate_block_covariance(data, spec));
                }
                const auto res = hede::run_hede_detailed(data, grid);
                const auto check = hede::recheck_grid(data, res.grid, grid, hede::RecheckMode::Recorded);
                const double err = res.estimate.h2 - sim.h2_realized;
                row += format_double(sim.h2_realized) + "," + format_double(res.estimate.h2) + ","
                       + format_double(err * err) + "," + std::to_string(cfg.n) + "," + std::to_string(cfg.p) + ","
                       + format_double(cfg.kappa) + "," + format_double(cfg.h2) + ","
                       + format_double(sim.truth.h2_true) + "," + (check.ok ? "true" : "false") + ",ok";
            } catch (const hede::Error& e) {
                std::cerr << "scenario " << s << " replicate " << r << ": " << e.what() << "\n";
                row += "NA,NA,NA," + std::to_string(cfg.n) + "," + std::to_string(cfg.p) + "," + format_double(cfg.kappa)
                       + "," + format_double(cfg.h2) + ",NA,false,"
                       + (e.category() == hede::Error::Category::Grid ? "empty_grid" : "failed");
            }
            csv += row + "\n";
        }
    }
    emit(csv, a.out);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hede: heritability estimation by ensembling debiased Lasso and ridge"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "estimate h2 from a design and a phenotype");
    estimate->add_option("--x", est.x, "standardized design, headerless CSV (rows = samples)");
    estimate->add_option("--genotypes", est.genotypes, "raw 0/1/2 counts, headerless CSV; NA allowed");
    estimate->add_option("--y", est.y, "phenotype, one value per line")->required();
    estimate->add_option("--blocks,--sigma-blocks", est.blocks, "block file for whitening, or 'identity'");
    estimate->add_option("--t-min", est.grid.t_min, "lower df/n bound")->capture_default_str();
    estimate->add_option("--t-max", est.grid.t_max, "upper df/n bound")->capture_default_str();
    estimate->add_option("--log-step", est.grid.log_step, "log spacing of the lambda grids")->capture_default_str();
    estimate->add_option("--seed", est.seed, "recorded in the report");
    estimate->add_option("--threads", est.threads, "worker cap (default: HEDE_THREADS)");
    estimate->add_option("--out", est.out, "JSON report path (default: stdout)");
    estimate->add_flag("--timing", est.timing, "add wall-clock seconds to the report");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "simulate a genotype data set");
    simulate->add_option("--config", sim.config, "key = value simulation config");
    simulate->add_option("--set", sim.sets, "override, e.g. --set h2=0.3");
    simulate->add_option("--out-dir", sim.out_dir, "directory for X.csv, y.csv, truth.json");

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle", "solve the Gaussian-design fixed-point system");
    oracle->add_option("--delta", orc.delta, "p / n")->capture_default_str();
    oracle->add_option("--sigma2", orc.sigma2, "noise variance")->capture_default_str();
    oracle->add_option("--sigma-beta2", orc.sigma_beta2, "||beta||^2")->capture_default_str();
    oracle->add_option("--kappa", orc.kappa, "nonzero fraction of the zero-inflated prior")->capture_default_str();
    oracle->add_option("--lambda-L", orc.lambda_L, "Lasso penalty")->required();
    oracle->add_option("--lambda-R", orc.lambda_R, "ridge penalty")->required();
    oracle->add_option("--beta", orc.beta, "use these coefficients as the prior (needs --n)");
    oracle->add_option("--n", orc.n, "sample size paired with --beta");
    oracle->add_option("--quad-nodes", orc.quad_nodes, "Gauss-Hermite nodes")->capture_default_str();
    oracle->add_option("--out", orc.out, "JSON path (default: stdout)");

    BenchmarkArgs bench;
    auto* benchmark = app.add_subcommand("benchmark", "simulate-and-estimate sweep to CSV");
    benchmark->add_option("--config", bench.config, "sweep config (comma lists are crossed)")->required();
    benchmark->add_option("--out", bench.out, "CSV path (default: stdout)");
    benchmark->add_option("--threads", bench.threads, "worker cap (default: HEDE_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*estimate) return cmd_estimate(est);
        if (*simulate) return cmd_simulate(sim);
        if (*oracle) return cmd_oracle(orc);
        if (*benchmark) return cmd_benchmark(bench);
    } catch (const hede::Error& e) {
        std::cerr << "hede: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "hede: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
