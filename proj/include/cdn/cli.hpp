#pragma once

// Command dispatcher behind the cdnroute binary.  Every subcommand reads one
// JSON config (schema_version 1), runs the mapped module operation, and
// writes a CSV or JSON artifact.  Exit codes: 0 success, 2 config error,
// 3 compute error.  Config problems are reported as machine-readable JSON
// records on stderr with the offending field path.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdn/serialization.hpp"

namespace cdn::cli {

using nlohmann::json;

struct Command {
    std::string subcommand;
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string p, const std::string& message)
        : std::runtime_error(message), path(std::move(p)) {}
};

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& prefix) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(prefix.empty() ? key : prefix + "." + key, "missing required field");
    return j.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& prefix) {
    try {
        return require(j, key, prefix).get<T>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(prefix.empty() ? key : prefix + "." + key, "field has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

inline void check_schema(const json& cfg) {
    if (get_as<int>(cfg, "schema_version", "") != 1)
        throw ConfigError("schema_version", "unsupported schema version");
}

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline geometry::ServerLayout layout_from_config(const json& cfg) {
    const auto& jl = require(cfg, "layout", "");
    try {
        return io::layout_from_json(jl);
    } catch (const std::exception& e) {
        throw ConfigError("layout", e.what());
    }
}

inline geometry::GeometryMode mode_from_config(const json& cfg) {
    const auto s = get_or<std::string>(cfg, "mode", "exact");
    try {
        return geometry::mode_from_string(s);
    } catch (const std::exception& e) {
        throw ConfigError("mode", e.what());
    }
}

inline queueing::BirthDeathChain chain_from_config(const json& cfg) {
    const double mu = get_as<double>(cfg, "mu", "");
    const double psi = get_as<double>(cfg, "psi", "");
    if (cfg.contains("lambda0"))
        return queueing::BirthDeathChain::from_peak(get_as<double>(cfg, "lambda0", ""), mu, psi);
    if (cfg.contains("areal_rate"))
        return queueing::BirthDeathChain::from_layout(get_as<double>(cfg, "areal_rate", ""),
                                                      get_or<double>(cfg, "speed_factor", 1.0), psi, mu);
    throw ConfigError("lambda0", "chain needs lambda0 or areal_rate");
}

struct Artifact {
    json data;
    std::string csv;
};

// ---- equilibrium -----------------------------------------------------------

inline Artifact run_equilibrium(const json& cfg) {
    const double population = get_or<double>(cfg, "population", 1.0);
    const auto& markets = require(cfg, "markets", "");
    if (!markets.is_array() || markets.empty())
        throw ConfigError("markets", "expected a non-empty array of beta vectors");
    const auto method = get_or<std::string>(cfg, "method", "closed_form");

    std::size_t k_common = 0;
    json rows = json::array();
    std::ostringstream csv;
    for (std::size_t r = 0; r < markets.size(); ++r) {
        const std::string where = "markets[" + std::to_string(r) + "]";
        if (!markets[r].is_array() || markets[r].size() < 1)
            throw ConfigError(where, "expected an array of betas");
        std::vector<double> betas = markets[r].get<std::vector<double>>();
        if (k_common == 0) {
            k_common = betas.size();
            csv << "k";
            for (std::size_t i = 1; i <= k_common; ++i) csv << ",beta" << i;
            for (std::size_t i = 1; i <= k_common; ++i) csv << ",w" << i;
            for (std::size_t i = 1; i <= k_common; ++i) csv << ",share" << i;
            for (std::size_t i = 1; i <= k_common; ++i) csv << ",revenue" << i;
            if (k_common == 2) csv << ",j1_over_j2";
            if (k_common == 3) csv << ",j1_over_j2,j2_over_j3,j1_over_j3";
            csv << "\n";
        } else if (betas.size() != k_common) {
            throw ConfigError(where, "all markets in one config must share K");
        }

        std::vector<competition::CdnProfile> profiles;
        for (double b : betas) profiles.push_back({b, 0.0});
        competition::EquilibriumResult eq;
        try {
            competition::MarketInstance m(profiles, population);
            if (method == "iteration") {
                eq = competition::best_response_iteration(m, get_or<double>(cfg, "tol", 1e-9),
                                                          get_or<int>(cfg, "max_iter", 20000),
                                                          get_or<double>(cfg, "damping", 0.5));
            } else if (k_common == 2) {
                eq = competition::equilibrium_duopoly(m);
            } else if (k_common == 3) {
                eq = competition::equilibrium_triopoly(m);
            } else {
                throw ConfigError(where, "closed forms exist for K=2 and K=3; use method=iteration");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where, e.what());
        }

        auto row = io::to_json(eq, betas);
        json ratios = json::object();
        if (k_common == 2) ratios["j1_over_j2"] = eq.revenues[0] / eq.revenues[1];
        if (k_common == 3) {
            ratios["j1_over_j2"] = eq.revenues[0] / eq.revenues[1];
            ratios["j2_over_j3"] = eq.revenues[1] / eq.revenues[2];
            ratios["j1_over_j3"] = eq.revenues[0] / eq.revenues[2];
        }
        row["ratios"] = ratios;
        rows.push_back(row);

        csv << k_common;
        for (double b : betas) csv << "," << fmt6(b);
        for (double w : eq.prices) csv << "," << fmt6(w);
        for (double s : eq.shares) csv << "," << fmt6(s);
        for (double j : eq.revenues) csv << "," << fmt6(j);
        if (k_common == 2) csv << "," << fmt6(eq.revenues[0] / eq.revenues[1]);
        if (k_common == 3)
            csv << "," << fmt6(eq.revenues[0] / eq.revenues[1]) << ","
                << fmt6(eq.revenues[1] / eq.revenues[2]) << ","
                << fmt6(eq.revenues[0] / eq.revenues[2]);
        csv << "\n";
    }
    return {json{{"schema_version", 1}, {"rows", rows}}, csv.str()};
}

// ---- ratio-sweep -----------------------------------------------------------

inline Artifact run_ratio_sweep(const json& cfg) {
    const double beta_fixed = get_as<double>(cfg, "beta_fixed", "");
    const int which = get_or<int>(cfg, "which", 2);
    const auto varying = get_as<std::vector<double>>(cfg, "beta_varying", "");
    competition::RatioSweepResult sweep;
    try {
        sweep = competition::ratio_sweep(beta_fixed, varying, which);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("beta_varying", e.what());
    }

    std::ostringstream csv;
    csv << "beta1,beta2,j1_over_j2\n";
    json rows = json::array();
    for (const auto& row : sweep.rows) {
        csv << fmt6(row.beta1) << "," << fmt6(row.beta2) << "," << fmt6(row.ratio) << "\n";
        rows.push_back({{"beta1", row.beta1}, {"beta2", row.beta2}, {"ratio", row.ratio}});
    }
    if (!sweep.skipped.empty())
        std::cerr << json{{"warning", "skipped rows violating beta ordering"},
                          {"values", sweep.skipped}}.dump()
                  << "\n";
    return {json{{"schema_version", 1}, {"rows", rows}, {"skipped", sweep.skipped}}, csv.str()};
}

// ---- chain / scaling -------------------------------------------------------

inline Artifact run_chain(const json& cfg) {
    const auto chain = chain_from_config(cfg);
    const double p0 = queueing::empty_probability(chain);
    const double tp = queueing::throughput(chain);
    const double ub = queueing::upper_bound(chain);
    json data{{"schema_version", 1},
              {"n_max", chain.n_max()},
              {"lambda0", chain.arrival(0)},
              {"mu", chain.mu},
              {"p0", p0},
              {"throughput", tp},
              {"upper_bound", ub},
              {"ratio", ub > 0 ? tp / ub : 0.0}};
    std::ostringstream csv;
    csv << "n_max,lambda0,mu,p0,throughput,upper_bound,ratio\n";
    csv << chain.n_max() << "," << fmt6(chain.arrival(0)) << "," << fmt6(chain.mu) << "," << fmt6(p0)
        << "," << fmt6(tp) << "," << fmt6(ub) << "," << fmt6(ub > 0 ? tp / ub : 0.0) << "\n";
    return {std::move(data), csv.str()};
}

inline std::string scaling_csv(const queueing::ScalingReport& report) {
    std::ostringstream csv;
    csv << "c,throughput,upper_bound,ratio\n";
    for (const auto& row : report.rows)
        csv << fmt6(row.c) << "," << fmt6(row.throughput) << "," << fmt6(row.upper_bound) << ","
            << fmt6(row.ratio) << "\n";
    return csv.str();
}

inline Artifact run_scaling(const json& cfg) {
    const auto chain = chain_from_config(cfg);
    const auto factors = get_as<std::vector<double>>(cfg, "factors", "");
    queueing::ScalingReport report;
    try {
        report = queueing::scaling_sweep(chain, factors);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("factors", e.what());
    }
    auto data = io::to_json(report);
    data["schema_version"] = 1;
    return {std::move(data), scaling_csv(report)};
}

// ---- static-solve ----------------------------------------------------------

inline Artifact run_static_solve(const json& cfg, std::uint64_t seed) {
    const auto layout = layout_from_config(cfg);
    const auto mode = mode_from_config(cfg);
    const auto samples = get_or<std::size_t>(cfg, "samples", geometry::kDefaultMcSamples);
    const auto decomp = geometry::decompose(layout, geometry::CoverageState::empty(layout.size()),
                                            mode, seed, samples);
    const auto plan = routing::solve_static(decomp, layout.service_rates);
    const auto assignment = routing::materialize(plan, layout, seed, samples);

    json data{{"schema_version", 1},
              {"seed", seed},
              {"decomposition", io::to_json(decomp)},
              {"plan", io::to_json(plan)},
              {"assignment", io::to_json(assignment)}};
    std::ostringstream csv;
    csv << "server,lambda0,mu,admit_fraction,gamma,variance\n";
    for (std::size_t i = 0; i < layout.size(); ++i)
        csv << i << "," << fmt6(plan.server_rates[i]) << "," << fmt6(layout.service_rates[i]) << ","
            << fmt6(plan.admit_fractions[i]) << "," << fmt6(plan.gamma) << ","
            << fmt6(plan.variance_objective) << "\n";
    return {std::move(data), csv.str()};
}

// ---- dp-solve --------------------------------------------------------------

inline Artifact run_dp_solve(const json& cfg, std::uint64_t seed) {
    const auto layout = layout_from_config(cfg);
    const auto mode = mode_from_config(cfg);
    mdp::BuildOptions opts;
    opts.samples = get_or<std::size_t>(cfg, "samples", geometry::kDefaultMcSamples);
    opts.state_cap = get_or<std::size_t>(cfg, "state_cap", opts.state_cap);
    opts.allow_origin = get_or<bool>(cfg, "allow_origin", false);
    const auto mdp_ = mdp::build_mdp(layout, mode, seed, opts);
    const auto sol = mdp::solve(mdp_, get_or<double>(cfg, "tol", 1e-9),
                                get_or<long long>(cfg, "max_iter", 1000000));
    if (!sol.converged)
        throw std::runtime_error("dp-solve: value iteration did not converge; residual " +
                                 std::to_string(sol.residual));
    auto data = io::solution_to_json(mdp_, sol);
    data["schema_version"] = 1;
    data["seed"] = seed;
    data["states"] = mdp_.state_count();
    std::ostringstream csv;
    csv << "states,gain,residual,converged,iterations\n";
    csv << mdp_.state_count() << "," << fmt6(sol.gain_rate) << "," << sol.residual << ","
        << (sol.converged ? 1 : 0) << "," << sol.iterations << "\n";
    return {std::move(data), csv.str()};
}

// ---- simulate / compare ----------------------------------------------------

inline json load_json_file(const std::string& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ConfigError(field, "cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(field, std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return j;
}

inline sim::SimConfig sim_config_from(const json& cfg, const json& policy, std::uint64_t seed,
                                      const std::string& where) {
    sim::SimConfig sc;
    sc.layout = layout_from_config(cfg);
    sc.horizon = get_as<double>(cfg, "horizon", "");
    sc.warmup = get_or<double>(cfg, "warmup", sim::default_warmup(sc.layout));
    sc.seed = seed;
    sc.price = get_or<double>(cfg, "price", 1.0);
    sc.penalty = get_or<double>(cfg, "penalty", 0.0);
    sc.batches = get_or<int>(cfg, "batches", 20);
    sc.trace_path = get_or<std::string>(cfg, "trace_path", "");
    const auto mode = mode_from_config(cfg);
    const auto samples = get_or<std::size_t>(cfg, "samples", geometry::kDefaultMcSamples);

    const auto kind = get_as<std::string>(policy, "kind", where);
    if (kind == "static") {
        sc.kind = sim::PolicyKind::StaticPlan;
        if (policy.contains("assignment")) {
            sc.assignment = io::assignment_from_json(policy.at("assignment"));
        } else if (policy.contains("assignment_path")) {
            auto j = load_json_file(policy.at("assignment_path").get<std::string>(), where + ".assignment_path");
            sc.assignment = io::assignment_from_json(j.contains("assignment") ? j.at("assignment") : j);
        } else {
            const auto d = geometry::decompose(sc.layout, geometry::CoverageState::empty(sc.layout.size()),
                                               mode, seed, samples);
            sc.assignment = routing::materialize(routing::solve_static(d, sc.layout.service_rates),
                                                 sc.layout, seed, samples);
        }
    } else if (kind == "dp") {
        sc.kind = sim::PolicyKind::Dp;
        if (policy.contains("solution_path")) {
            auto j = load_json_file(policy.at("solution_path").get<std::string>(), where + ".solution_path");
            sc.dp_table = io::policy_table_from_json(j.contains("policy") ? j.at("policy") : j);
        } else {
            mdp::BuildOptions opts;
            opts.samples = samples;
            opts.state_cap = get_or<std::size_t>(cfg, "state_cap", opts.state_cap);
            const auto mdp_ = mdp::build_mdp(sc.layout, mode, seed, opts);
            sc.dp_table = mdp::make_policy_table(mdp_, mdp::solve(mdp_, get_or<double>(cfg, "tol", 1e-9)));
        }
    } else if (kind == "greedy") {
        sc.kind = sim::PolicyKind::GreedyNearest;
    } else if (kind == "random") {
        sc.kind = sim::PolicyKind::RandomFeasible;
    } else {
        throw ConfigError(where + ".kind", "unknown policy kind: " + kind);
    }
    return sc;
}

inline std::string sim_csv_header() {
    return "policy,arrivals,served_within_psi,origin_served,strict_deadline_served,"
           "throughput_rate,revenue_rate,throughput_stderr,ci_half_width\n";
}

inline void sim_csv_row(std::ostringstream& csv, const std::string& label, const sim::SimReport& r) {
    csv << label << "," << r.arrivals << "," << r.served_within_psi << "," << r.origin_served << ","
        << r.strict_deadline_served << "," << fmt6(r.throughput_rate) << "," << fmt6(r.revenue_rate)
        << "," << fmt6(r.throughput_stderr) << "," << fmt6(r.ci_half_width) << "\n";
}

inline Artifact run_simulate(const json& cfg, std::uint64_t seed) {
    const auto& policy = require(cfg, "policy", "");
    const auto sc = sim_config_from(cfg, policy, seed, "policy");
    const auto rep = sim::run(sc);
    auto data = io::to_json(rep);
    data["schema_version"] = 1;
    data["policy"] = sim::policy_name(sc.kind);
    std::ostringstream csv;
    csv << sim_csv_header();
    sim_csv_row(csv, sim::policy_name(sc.kind), rep);
    return {std::move(data), csv.str()};
}

inline Artifact run_compare(const json& cfg, std::uint64_t seed) {
    const auto& policies = require(cfg, "policies", "");
    if (!policies.is_array() || policies.empty())
        throw ConfigError("policies", "expected a non-empty array");
    std::vector<sim::SimConfig> configs;
    for (std::size_t i = 0; i < policies.size(); ++i)
        configs.push_back(sim_config_from(cfg, policies[i], seed, "policies[" + std::to_string(i) + "]"));
    const auto cmp = sim::compare_policies(configs);

    json rows = json::array();
    std::ostringstream csv;
    csv << "policy,throughput_rate,revenue_rate,throughput_stderr,diff_vs_first,diff_stderr\n";
    for (std::size_t i = 0; i < cmp.reports.size(); ++i) {
        const auto& r = cmp.reports[i];
        const std::string label = sim::policy_name(configs[i].kind);
        json row = io::to_json(r);
        row["policy"] = label;
        row["throughput_diff_vs_first"] = cmp.throughput_diff_vs_first[i];
        row["throughput_diff_stderr"] = cmp.throughput_diff_stderr[i];
        rows.push_back(row);
        csv << label << "," << fmt6(r.throughput_rate) << "," << fmt6(r.revenue_rate) << ","
            << fmt6(r.throughput_stderr) << "," << fmt6(cmp.throughput_diff_vs_first[i]) << ","
            << fmt6(cmp.throughput_diff_stderr[i]) << "\n";
    }
    return {json{{"schema_version", 1}, {"rows", rows}}, csv.str()};
}

// ---- scaling experiment over the simulator ---------------------------------

inline Artifact run_sim_scaling(const json& cfg, std::uint64_t seed) {
    const auto& policy = require(cfg, "policy", "");
    const auto base = sim_config_from(cfg, policy, seed, "policy");
    const auto factors = get_as<std::vector<double>>(cfg, "factors", "");
    sim::ScalingOptions opts;
    opts.mode = mode_from_config(cfg);
    opts.samples = get_or<std::size_t>(cfg, "samples", geometry::kDefaultMcSamples);
    const auto report = sim::scaling_experiment(base, factors, opts);
    auto data = io::to_json(report);
    data["schema_version"] = 1;
    return {std::move(data), scaling_csv(report)};
}

inline std::string resolve_out_path(const std::string& out) {
    const char* dir = std::getenv("CDNROUTE_OUT_DIR");
    if (dir && *dir && !std::filesystem::path(out).is_absolute())
        return (std::filesystem::path(dir) / out).string();
    return out;
}

} // namespace detail

inline int dispatch(const Command& cmd) {
    using detail::Artifact;
    try {
        if (cmd.format != "csv" && cmd.format != "json")
            throw ConfigError("--format", "format must be csv or json");
        const auto cfg = detail::load_json_file(cmd.config_path, "--config");
        detail::check_schema(cfg);
        const std::uint64_t seed = cmd.seed_set ? cmd.seed : detail::get_or<std::uint64_t>(cfg, "seed", 1);

        Artifact artifact;
        if (cmd.subcommand == "equilibrium") artifact = detail::run_equilibrium(cfg);
        else if (cmd.subcommand == "ratio-sweep") artifact = detail::run_ratio_sweep(cfg);
        else if (cmd.subcommand == "chain") artifact = detail::run_chain(cfg);
        else if (cmd.subcommand == "scaling") artifact = detail::run_scaling(cfg);
        else if (cmd.subcommand == "static-solve") artifact = detail::run_static_solve(cfg, seed);
        else if (cmd.subcommand == "dp-solve") artifact = detail::run_dp_solve(cfg, seed);
        else if (cmd.subcommand == "simulate") artifact = detail::run_simulate(cfg, seed);
        else if (cmd.subcommand == "compare") artifact = detail::run_compare(cfg, seed);
        else if (cmd.subcommand == "sim-scaling") artifact = detail::run_sim_scaling(cfg, seed);
        else throw ConfigError("subcommand", "unknown subcommand: " + cmd.subcommand);

        const auto out = detail::resolve_out_path(cmd.out_path);
        const auto parent = std::filesystem::path(out).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        std::ofstream of(out, std::ios::binary);
        if (!of) throw std::runtime_error("cannot open output file: " + out);
        if (cmd.format == "json") of << artifact.data.dump(2) << "\n";
        else of << artifact.csv;
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << json{{"error", {{"kind", "config"}, {"path", e.path}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "compute"}, {"message", e.what()}}}}.dump() << "\n";
        return 3;
    }
}

} // namespace cdn::cli
