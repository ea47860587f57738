#pragma once

// JSON round-trip helpers for layouts, plans, policies, and reports.
// Infinite cut bounds are encoded as +/-1e300 sentinels so artifacts stay
// plain JSON.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdn/birth_death.hpp"
#include "cdn/competition.hpp"
#include "cdn/dynamic_policy.hpp"
#include "cdn/geometry.hpp"
#include "cdn/sim.hpp"
#include "cdn/static_policy.hpp"

namespace cdn::io {

using nlohmann::json;

inline double encode_bound(double v) {
    if (std::isinf(v)) return v > 0 ? 1e300 : -1e300;
    return v;
}
inline double decode_bound(double v) {
    if (v >= 1e299) return std::numeric_limits<double>::infinity();
    if (v <= -1e299) return -std::numeric_limits<double>::infinity();
    return v;
}

// --- geometry ---------------------------------------------------------------

inline json to_json(const geometry::ServerLayout& l) {
    json positions = json::array();
    for (const auto& p : l.positions) positions.push_back({p.x, p.y});
    return json{{"positions", positions},
                {"mu", l.service_rates},
                {"psi", l.psi},
                {"region", {l.region.xmin, l.region.ymin, l.region.xmax, l.region.ymax}},
                {"areal_rate", l.areal_rate},
                {"speed_factor", l.speed_factor}};
}

inline geometry::ServerLayout layout_from_json(const json& j) {
    geometry::ServerLayout l;
    for (const auto& p : j.at("positions"))
        l.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    l.service_rates = j.at("mu").get<std::vector<double>>();
    l.psi = j.at("psi").get<double>();
    const auto& r = j.at("region");
    l.region = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
    l.areal_rate = j.at("areal_rate").get<double>();
    l.speed_factor = j.value("speed_factor", 1.0);
    l.validate();
    return l;
}

inline json to_json(const geometry::AreaDecomposition& d) {
    json commons = json::array();
    for (const auto& z : d.common_regions) commons.push_back({{"servers", z.servers}, {"rate", z.rate}});
    return json{{"exclusive_rates", d.exclusive_rates},
                {"common_regions", commons},
                {"total_covered_rate", d.total_covered_rate}};
}

inline geometry::AreaDecomposition decomposition_from_json(const json& j) {
    geometry::AreaDecomposition d;
    d.exclusive_rates = j.at("exclusive_rates").get<std::vector<double>>();
    for (const auto& z : j.at("common_regions"))
        d.common_regions.push_back({z.at("servers").get<std::vector<int>>(), z.at("rate").get<double>()});
    d.total_covered_rate = j.at("total_covered_rate").get<double>();
    return d;
}

// --- competition ------------------------------------------------------------

inline json to_json(const competition::EquilibriumResult& r, const std::vector<double>& betas) {
    return json{{"betas", betas},
                {"prices", r.prices},
                {"thresholds", r.thresholds},
                {"shares", r.shares},
                {"revenues", r.revenues},
                {"converged", r.converged},
                {"iterations", r.iterations}};
}

inline competition::EquilibriumResult equilibrium_from_json(const json& j) {
    competition::EquilibriumResult r;
    r.prices = j.at("prices").get<std::vector<double>>();
    r.thresholds = j.at("thresholds").get<std::vector<double>>();
    r.shares = j.at("shares").get<std::vector<double>>();
    r.revenues = j.at("revenues").get<std::vector<double>>();
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.at("iterations").get<int>();
    return r;
}

// --- queueing ---------------------------------------------------------------

inline json to_json(const queueing::ScalingReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"c", row.c},
                        {"throughput", row.throughput},
                        {"upper_bound", row.upper_bound},
                        {"ratio", row.ratio}});
    return json{{"rows", rows}};
}

inline queueing::ScalingReport scaling_from_json(const json& j) {
    queueing::ScalingReport r;
    for (const auto& row : j.at("rows"))
        r.rows.push_back({row.at("c").get<double>(), row.at("throughput").get<double>(),
                          row.at("upper_bound").get<double>(), row.at("ratio").get<double>()});
    return r;
}

// --- static policy ----------------------------------------------------------

inline json to_json(const routing::AssignmentPlan& p) {
    json regions = json::array();
    for (std::size_t z = 0; z < p.regions.size(); ++z)
        regions.push_back({{"servers", p.regions[z].servers},
                           {"rate", p.regions[z].rate},
                           {"splits", p.split_fractions[z]}});
    return json{{"admit_fractions", p.admit_fractions},
                {"regions", regions},
                {"server_rates", p.server_rates},
                {"gamma", p.gamma},
                {"variance_objective", p.variance_objective},
                {"stage1_certified", p.stage1_certified}};
}

inline routing::AssignmentPlan plan_from_json(const json& j) {
    routing::AssignmentPlan p;
    p.admit_fractions = j.at("admit_fractions").get<std::vector<double>>();
    for (const auto& z : j.at("regions")) {
        p.regions.push_back({z.at("servers").get<std::vector<int>>(), z.at("rate").get<double>()});
        p.split_fractions.push_back(z.at("splits").get<std::vector<double>>());
    }
    p.server_rates = j.at("server_rates").get<std::vector<double>>();
    p.gamma = j.at("gamma").get<double>();
    p.variance_objective = j.at("variance_objective").get<double>();
    p.stage1_certified = j.at("stage1_certified").get<bool>();
    return p;
}

inline json to_json(const routing::RegionAssignment& a) {
    json positions = json::array();
    for (const auto& p : a.positions) positions.push_back({p.x, p.y});
    json cuts = json::array();
    for (const auto& [mask, cut] : a.cuts) {
        json bounds = json::array();
        for (double c : cut.cuts) bounds.push_back(encode_bound(c));
        cuts.push_back({{"mask", mask},
                        {"servers", cut.servers},
                        {"axis", {cut.axis.x, cut.axis.y}},
                        {"cuts", bounds}});
    }
    return json{{"positions", positions},
                {"empty_radii", a.empty_radii},
                {"admit_fractions", a.admit_fractions},
                {"cuts", cuts}};
}

inline routing::RegionAssignment assignment_from_json(const json& j) {
    routing::RegionAssignment a;
    for (const auto& p : j.at("positions"))
        a.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    a.empty_radii = j.at("empty_radii").get<std::vector<double>>();
    a.admit_fractions = j.at("admit_fractions").get<std::vector<double>>();
    for (const auto& c : j.at("cuts")) {
        routing::RegionCut cut;
        cut.servers = c.at("servers").get<std::vector<int>>();
        cut.axis = {c.at("axis").at(0).get<double>(), c.at("axis").at(1).get<double>()};
        for (const auto& b : c.at("cuts")) cut.cuts.push_back(decode_bound(b.get<double>()));
        a.cuts[c.at("mask").get<std::uint64_t>()] = std::move(cut);
    }
    return a;
}

// --- dynamic policy ---------------------------------------------------------

inline json to_json(const mdp::PolicyTable& t) {
    json states = json::array();
    for (std::size_t idx = 0; idx < t.entries.size(); ++idx) {
        if (t.entries[idx].empty()) continue; // sparse
        json regions = json::array();
        for (const auto& [mask, server] : t.entries[idx]) regions.push_back({mask, server});
        states.push_back({{"index", idx}, {"regions", regions}});
    }
    return json{{"dims", t.dims}, {"states", states}};
}

inline mdp::PolicyTable policy_table_from_json(const json& j) {
    mdp::PolicyTable t;
    t.dims = j.at("dims").get<std::vector<long long>>();
    std::size_t count = 1;
    for (long long d : t.dims) count *= static_cast<std::size_t>(d);
    t.entries.resize(count);
    for (const auto& s : j.at("states")) {
        auto& list = t.entries[s.at("index").get<std::size_t>()];
        for (const auto& r : s.at("regions"))
            list.emplace_back(r.at(0).get<std::uint64_t>(), r.at(1).get<int>());
    }
    return t;
}

inline json solution_to_json(const mdp::UniformizedMdp& mdp_, const mdp::MdpSolution& sol) {
    return json{{"gain", sol.gain_rate},
                {"gain_per_step", sol.gain_per_step},
                {"residual", sol.residual},
                {"converged", sol.converged},
                {"iterations", sol.iterations},
                {"policy", to_json(mdp::make_policy_table(mdp_, sol))}};
}

// --- simulation -------------------------------------------------------------

inline json to_json(const sim::SimReport& r) {
    return json{{"arrivals", r.arrivals},
                {"served_within_psi", r.served_within_psi},
                {"origin_served", r.origin_served},
                {"strict_deadline_served", r.strict_deadline_served},
                {"duration", r.duration},
                {"arrival_rate", r.arrival_rate},
                {"throughput_rate", r.throughput_rate},
                {"revenue_rate", r.revenue_rate},
                {"utilization", r.utilization},
                {"served_per_server", r.served_per_server},
                {"batch_throughput", r.batch_throughput},
                {"throughput_stderr", r.throughput_stderr},
                {"revenue_stderr", r.revenue_stderr},
                {"ci_half_width", r.ci_half_width},
                {"seed", r.seed},
                {"horizon", r.horizon},
                {"warmup", r.warmup}};
}

inline sim::SimReport sim_report_from_json(const json& j) {
    sim::SimReport r;
    r.arrivals = j.at("arrivals").get<long long>();
    r.served_within_psi = j.at("served_within_psi").get<long long>();
    r.origin_served = j.at("origin_served").get<long long>();
    r.strict_deadline_served = j.at("strict_deadline_served").get<long long>();
    r.duration = j.at("duration").get<double>();
    r.arrival_rate = j.at("arrival_rate").get<double>();
    r.throughput_rate = j.at("throughput_rate").get<double>();
    r.revenue_rate = j.at("revenue_rate").get<double>();
    r.utilization = j.at("utilization").get<std::vector<double>>();
    r.served_per_server = j.at("served_per_server").get<std::vector<long long>>();
    r.batch_throughput = j.at("batch_throughput").get<std::vector<double>>();
    r.throughput_stderr = j.at("throughput_stderr").get<double>();
    r.revenue_stderr = j.at("revenue_stderr").get<double>();
    r.ci_half_width = j.at("ci_half_width").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.horizon = j.at("horizon").get<double>();
    r.warmup = j.at("warmup").get<double>();
    return r;
}

} // namespace cdn::io
