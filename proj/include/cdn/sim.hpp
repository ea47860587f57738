#pragma once

// Discrete-event execution of routing policies.  Poisson arrivals land
// uniformly on the region; a request is feasible for server i when its
// transmission plus expected queueing and service time fits in psi, i.e.
// distance <= current radius.  Admission is decided on that expectation, so
// an admitted request counts as served-within-psi even if its realized
// completion is later; a strict-deadline counter is kept alongside for
// sensitivity checks.  Runs are single-threaded and reproducible: events
// process in (time, sequence) order and each randomness purpose draws from
// its own stream split off the master seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdn/birth_death.hpp"
#include "cdn/dynamic_policy.hpp"
#include "cdn/geometry.hpp"
#include "cdn/static_policy.hpp"

namespace cdn::sim {

enum class PolicyKind { StaticPlan, Dp, GreedyNearest, RandomFeasible };

inline const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::StaticPlan: return "static";
        case PolicyKind::Dp: return "dp";
        case PolicyKind::GreedyNearest: return "greedy";
        case PolicyKind::RandomFeasible: return "random";
    }
    return "?";
}

// Conventional settling period before statistics start.
inline double default_warmup(const geometry::ServerLayout& layout) {
    long long max_bound = 0;
    double min_mu = layout.service_rates.front();
    for (std::size_t i = 0; i < layout.size(); ++i) {
        max_bound = std::max(max_bound, geometry::queue_bound(layout, i));
        min_mu = std::min(min_mu, layout.service_rates[i]);
    }
    return 10.0 * static_cast<double>(std::max<long long>(max_bound, 0)) / min_mu;
}

struct SimConfig {
    geometry::ServerLayout layout;
    PolicyKind kind = PolicyKind::GreedyNearest;
    routing::RegionAssignment assignment; // used when kind == StaticPlan
    mdp::PolicyTable dp_table;            // used when kind == Dp
    double horizon = 1000.0;
    double warmup = 0.0;
    std::uint64_t seed = 1;
    double price = 1.0;   // w1 per request served within psi
    double penalty = 0.0; // w1' per request that misses psi
    int batches = 20;
    std::string trace_path; // non-empty: write a time,event,server,queue log

    void validate() const {
        layout.validate();
        if (!(horizon > warmup && warmup >= 0.0))
            throw std::invalid_argument("SimConfig: need horizon > warmup >= 0");
        if (!(price >= 0.0 && penalty >= 0.0))
            throw std::invalid_argument("SimConfig: price and penalty must be >= 0");
        if (batches < 1) throw std::invalid_argument("SimConfig: need >= 1 batch");
    }
};

struct SimReport {
    long long arrivals = 0;
    long long served_within_psi = 0;
    long long origin_served = 0;
    long long strict_deadline_served = 0; // realized completion within psi
    double duration = 0.0;
    double arrival_rate = 0.0;
    double throughput_rate = 0.0;
    double revenue_rate = 0.0;
    std::vector<double> utilization;
    std::vector<long long> served_per_server;
    std::vector<double> batch_throughput;
    double throughput_stderr = 0.0;
    double revenue_stderr = 0.0;
    double ci_half_width = 0.0; // 95% batch-means CI on the throughput rate
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double warmup = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(purpose)));
}

inline double t_quantile_975(int df) {
    // two-sided 95% t multipliers; normal beyond the table
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045};
    if (df < 1) return 12.706;
    if (df <= 29) return table[df - 1];
    return 1.96;
}

} // namespace detail

inline SimReport run(const SimConfig& cfg) {
    cfg.validate();
    const auto& layout = cfg.layout;
    const std::size_t m = layout.size();
    const double lambda_total = layout.total_arrival_rate();

    auto arrivals_rng = detail::stream(cfg.seed, 1);
    auto location_rng = detail::stream(cfg.seed, 2);
    auto service_rng = detail::stream(cfg.seed, 3);
    auto coin_rng = detail::stream(cfg.seed, 4);
    std::exponential_distribution<double> interarrival(lambda_total);
    std::uniform_real_distribution<double> ux(layout.region.xmin, layout.region.xmax);
    std::uniform_real_distribution<double> uy(layout.region.ymin, layout.region.ymax);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::vector<long long> queue(m, 0);
    std::vector<std::deque<double>> arrival_times(m); // FCFS, front is in service
    std::vector<double> next_departure(m, std::numeric_limits<double>::infinity());
    std::vector<long long> bound(m);
    for (std::size_t i = 0; i < m; ++i) bound[i] = geometry::queue_bound(layout, i);

    SimReport rep;
    rep.seed = cfg.seed;
    rep.horizon = cfg.horizon;
    rep.warmup = cfg.warmup;
    rep.duration = cfg.horizon - cfg.warmup;
    rep.utilization.assign(m, 0.0);
    rep.served_per_server.assign(m, 0);
    const double batch_len = rep.duration / cfg.batches;
    std::vector<long long> batch_served(static_cast<std::size_t>(cfg.batches), 0);
    std::vector<long long> batch_origin(static_cast<std::size_t>(cfg.batches), 0);

    double now = 0.0;
    double next_arrival = lambda_total > 0.0 ? interarrival(arrivals_rng)
                                             : std::numeric_limits<double>::infinity();
    std::vector<double> busy_since(m, -1.0);

    std::ofstream trace;
    if (!cfg.trace_path.empty()) {
        trace.open(cfg.trace_path, std::ios::binary);
        if (!trace) throw std::runtime_error("simulation: cannot open trace file " + cfg.trace_path);
        trace << "time,event,server,queue\n";
    }
    const auto trace_line = [&](double t, const char* kind, int server, long long q) {
        if (!trace.is_open()) return;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.9f,%s,%d,%lld\n", t, kind, server, q);
        trace << buf;
    };

    const auto batch_of = [&](double t) {
        return std::min<std::size_t>(static_cast<std::size_t>(cfg.batches) - 1,
                                     static_cast<std::size_t>((t - cfg.warmup) / batch_len));
    };
    const auto accumulate_busy = [&](std::size_t i, double from, double to) {
        const double lo = std::max(from, cfg.warmup), hi = std::min(to, cfg.horizon);
        if (hi > lo) rep.utilization[i] += hi - lo;
    };

    while (true) {
        // next event: arrivals win ties, then the lowest server index
        double t_next = next_arrival;
        int which = -1;
        for (std::size_t i = 0; i < m; ++i)
            if (next_departure[i] < t_next) { t_next = next_departure[i]; which = static_cast<int>(i); }
        if (t_next > cfg.horizon) break;
        now = t_next;

        if (which < 0) {
            // --- arrival ---
            const geometry::Point p{ux(location_rng), uy(location_rng)};
            next_arrival = now + interarrival(arrivals_rng);
            const bool counted = now >= cfg.warmup;
            if (counted) ++rep.arrivals;

            std::uint64_t feasible = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const double r = geometry::radius(layout, i, queue[i]);
                const double dx = p.x - layout.positions[i].x, dy = p.y - layout.positions[i].y;
                if (r > 0.0 && dx * dx + dy * dy <= r * r) feasible |= std::uint64_t{1} << i;
            }

            int target = -1;
            switch (cfg.kind) {
                case PolicyKind::StaticPlan: {
                    const int owner = cfg.assignment.server_for(p);
                    if (owner >= 0 && (feasible & (std::uint64_t{1} << owner))) {
                        target = owner;
                        const double admit = cfg.assignment.admit_fractions.empty()
                                                 ? 1.0
                                                 : cfg.assignment.admit_fractions[static_cast<std::size_t>(owner)];
                        if (admit < 1.0 && coin(coin_rng) >= admit) target = -1;
                    }
                    break;
                }
                case PolicyKind::Dp: {
                    target = cfg.dp_table.choose(queue, feasible);
                    if (target >= 0 && !(feasible & (std::uint64_t{1} << target)))
                        throw std::runtime_error("simulation: policy chose infeasible server " +
                                                 std::to_string(target) + " at t=" + std::to_string(now));
                    break;
                }
                case PolicyKind::GreedyNearest: {
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < m; ++i) {
                        if (!(feasible & (std::uint64_t{1} << i))) continue;
                        const double dx = p.x - layout.positions[i].x, dy = p.y - layout.positions[i].y;
                        const double d2 = dx * dx + dy * dy;
                        if (d2 < best) { best = d2; target = static_cast<int>(i); }
                    }
                    break;
                }
                case PolicyKind::RandomFeasible: {
                    std::vector<int> options;
                    for (std::size_t i = 0; i < m; ++i)
                        if (feasible & (std::uint64_t{1} << i)) options.push_back(static_cast<int>(i));
                    if (!options.empty())
                        target = options[std::min<std::size_t>(
                            options.size() - 1,
                            static_cast<std::size_t>(coin(coin_rng) * static_cast<double>(options.size())))];
                    break;
                }
            }

            if (target < 0) {
                if (counted) { ++rep.origin_served; ++batch_origin[batch_of(now)]; }
                trace_line(now, "origin", -1, 0);
                continue;
            }
            const auto s = static_cast<std::size_t>(target);
            ++queue[s];
            if (queue[s] > bound[s])
                throw std::logic_error("simulation: queue bound exceeded at server " + std::to_string(s));
            trace_line(now, "arrival", target, queue[s]);
            arrival_times[s].push_back(now);
            if (queue[s] == 1) {
                busy_since[s] = now;
                std::exponential_distribution<double> service(layout.service_rates[s]);
                next_departure[s] = now + service(service_rng);
            }
            if (counted) {
                ++rep.served_within_psi;
                ++rep.served_per_server[s];
                ++batch_served[batch_of(now)];
            }
        } else {
            // --- departure ---
            const auto s = static_cast<std::size_t>(which);
            const double entered = arrival_times[s].front();
            arrival_times[s].pop_front();
            if (entered >= cfg.warmup && now - entered <= layout.psi) ++rep.strict_deadline_served;
            --queue[s];
            trace_line(now, "departure", which, queue[s]);
            if (queue[s] > 0) {
                std::exponential_distribution<double> service(layout.service_rates[s]);
                next_departure[s] = now + service(service_rng);
            } else {
                next_departure[s] = std::numeric_limits<double>::infinity();
                accumulate_busy(s, busy_since[s], now);
                busy_since[s] = -1.0;
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        if (busy_since[i] >= 0.0) accumulate_busy(i, busy_since[i], cfg.horizon);

    rep.arrival_rate = static_cast<double>(rep.arrivals) / rep.duration;
    rep.throughput_rate = static_cast<double>(rep.served_within_psi) / rep.duration;
    rep.revenue_rate = (cfg.price * static_cast<double>(rep.served_within_psi) -
                        cfg.penalty * static_cast<double>(rep.origin_served)) /
                       rep.duration;
    for (auto& u : rep.utilization) u /= rep.duration;

    rep.batch_throughput.resize(batch_served.size());
    for (std::size_t b = 0; b < batch_served.size(); ++b)
        rep.batch_throughput[b] = static_cast<double>(batch_served[b]) / batch_len;
    double var_thr = 0.0, var_rev = 0.0;
    for (std::size_t b = 0; b < batch_served.size(); ++b) {
        const double thr = rep.batch_throughput[b];
        const double rev = (cfg.price * static_cast<double>(batch_served[b]) -
                            cfg.penalty * static_cast<double>(batch_origin[b])) / batch_len;
        var_thr += (thr - rep.throughput_rate) * (thr - rep.throughput_rate);
        var_rev += (rev - rep.revenue_rate) * (rev - rep.revenue_rate);
    }
    if (cfg.batches > 1) {
        var_thr /= static_cast<double>(cfg.batches - 1);
        var_rev /= static_cast<double>(cfg.batches - 1);
        rep.throughput_stderr = std::sqrt(var_thr / cfg.batches);
        rep.revenue_stderr = std::sqrt(var_rev / cfg.batches);
        rep.ci_half_width = detail::t_quantile_975(cfg.batches - 1) * rep.throughput_stderr;
    }
    return rep;
}

struct PolicyComparison {
    std::vector<SimReport> reports;
    std::vector<double> throughput_diff_vs_first;   // paired, common random numbers
    std::vector<double> throughput_diff_stderr;
};

inline PolicyComparison compare_policies(const std::vector<SimConfig>& configs) {
    if (configs.empty()) throw std::invalid_argument("compare_policies: no configs");
    const auto& base = configs.front();
    PolicyComparison out;
    for (const auto& cfg : configs) {
        if (cfg.layout.positions.size() != base.layout.positions.size() ||
            cfg.layout.psi != base.layout.psi || cfg.layout.areal_rate != base.layout.areal_rate ||
            cfg.layout.speed_factor != base.layout.speed_factor ||
            cfg.seed != base.seed || cfg.horizon != base.horizon || cfg.warmup != base.warmup ||
            cfg.batches != base.batches)
            throw std::invalid_argument("compare_policies: configs must share layout, seed and horizon");
        for (std::size_t i = 0; i < base.layout.positions.size(); ++i)
            if (cfg.layout.positions[i].x != base.layout.positions[i].x ||
                cfg.layout.positions[i].y != base.layout.positions[i].y ||
                cfg.layout.service_rates[i] != base.layout.service_rates[i])
                throw std::invalid_argument("compare_policies: layouts differ");
        out.reports.push_back(run(cfg));
    }
    const auto& ref = out.reports.front();
    for (const auto& rep : out.reports) {
        double mean = 0.0;
        std::vector<double> diffs(rep.batch_throughput.size());
        for (std::size_t b = 0; b < diffs.size(); ++b) {
            diffs[b] = rep.batch_throughput[b] - ref.batch_throughput[b];
            mean += diffs[b];
        }
        mean /= static_cast<double>(diffs.size());
        double var = 0.0;
        for (double d : diffs) var += (d - mean) * (d - mean);
        var = diffs.size() > 1 ? var / static_cast<double>(diffs.size() - 1) : 0.0;
        out.throughput_diff_vs_first.push_back(mean);
        out.throughput_diff_stderr.push_back(std::sqrt(var / static_cast<double>(diffs.size())));
    }
    return out;
}

struct ScalingOptions {
    geometry::GeometryMode mode = geometry::GeometryMode::Exact;
    std::size_t samples = geometry::kDefaultMcSamples;
};

inline geometry::ServerLayout scaled_layout(geometry::ServerLayout layout, double c) {
    for (auto& mu : layout.service_rates) mu *= c;
    layout.areal_rate *= c;
    return layout;
}

// Re-solves the static plan at every scale and measures the simulated
// throughput against the stage-1 upper bound sum_i min(lambda_i(0), mu_i).
inline queueing::ScalingReport scaling_experiment(const SimConfig& base, const std::vector<double>& factors,
                                                  const ScalingOptions& opts = {}) {
    base.validate();
    if (base.kind != PolicyKind::StaticPlan && base.kind != PolicyKind::GreedyNearest)
        throw std::invalid_argument("scaling_experiment: supported for static and greedy policies");
    queueing::ScalingReport report;
    for (double c : factors) {
        if (!(c >= 1.0)) throw std::invalid_argument("scaling_experiment: factors must be >= 1");
        SimConfig cfg = base;
        if (!cfg.trace_path.empty())
            cfg.trace_path += ".c" + std::to_string(static_cast<long long>(c));
        cfg.layout = scaled_layout(base.layout, c);
        const auto decomp = geometry::decompose(cfg.layout, geometry::CoverageState::empty(cfg.layout.size()),
                                                opts.mode, base.seed, opts.samples);
        const auto plan = routing::solve_static(decomp, cfg.layout.service_rates);
        if (base.kind == PolicyKind::StaticPlan)
            cfg.assignment = routing::materialize(plan, cfg.layout, base.seed, opts.samples);
        const auto rep = run(cfg);
        queueing::ScalingRow row;
        row.c = c;
        row.throughput = rep.throughput_rate;
        row.upper_bound = plan.gamma;
        row.ratio = row.upper_bound > 0.0 ? row.throughput / row.upper_bound : 0.0;
        report.rows.push_back(row);
    }
    return report;
}

} // namespace cdn::sim
