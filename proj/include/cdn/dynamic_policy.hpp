#pragma once

// Optimal dynamic routing for small server counts.  The joint queue process
// is uniformized at rate nu = lambda_total + sum_i mu_i and solved by
// relative value iteration.  Actions assign each elementary coverage region
// (at the current state's geometry) to one feasible participant; because the
// objective is additive over regions, the per-state maximization decomposes
// into an independent argmax per region.  Reward is the departure rate of
// busy servers, so the average reward times nu is the throughput.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdn/geometry.hpp"

namespace cdn::mdp {

struct StateRates {
    std::vector<double> exclusive;                      // per server
    std::vector<std::pair<std::uint64_t, double>> commons; // subset mask -> rate
    double covered = 0.0;
};

struct BuildOptions {
    std::size_t state_cap = 200000;
    std::size_t samples = geometry::kDefaultMcSamples;
    bool allow_origin = false; // adds an origin-redirect action per region
};

struct UniformizedMdp {
    geometry::ServerLayout layout;
    std::vector<long long> dims;   // queue_bound_i + 1 states per server
    std::vector<StateRates> rates; // indexed by flattened state
    double nu = 0.0;
    bool allow_origin = false;

    std::size_t state_count() const { return rates.size(); }

    std::size_t index_of(const std::vector<long long>& n) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (n[i] < 0 || n[i] >= dims[i]) throw std::invalid_argument("state out of range");
            idx = idx * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(n[i]);
        }
        return idx;
    }

    std::vector<long long> state_of(std::size_t idx) const {
        std::vector<long long> n(dims.size());
        for (std::size_t i = dims.size(); i-- > 0;) {
            n[i] = static_cast<long long>(idx % static_cast<std::size_t>(dims[i]));
            idx /= static_cast<std::size_t>(dims[i]);
        }
        return n;
    }
};

inline UniformizedMdp build_mdp(const geometry::ServerLayout& layout, geometry::GeometryMode mode,
                                std::uint64_t seed, const BuildOptions& opts = {}) {
    layout.validate();
    const std::size_t m = layout.size();

    UniformizedMdp mdp;
    mdp.layout = layout;
    mdp.allow_origin = opts.allow_origin;
    mdp.dims.resize(m);
    std::size_t count = 1;
    for (std::size_t i = 0; i < m; ++i) {
        mdp.dims[i] = geometry::queue_bound(layout, i) + 1;
        if (mdp.dims[i] < 1) mdp.dims[i] = 1;
        count *= static_cast<std::size_t>(mdp.dims[i]);
        if (count > opts.state_cap)
            throw std::invalid_argument("build_mdp: state space of " + std::to_string(count) +
                                        "+ states exceeds the cap of " + std::to_string(opts.state_cap));
    }

    double mu_sum = 0.0;
    for (double mu : layout.service_rates) mu_sum += mu;
    mdp.nu = layout.total_arrival_rate() + mu_sum;

    // geometry is expensive; states sharing a radius vector share rates
    const geometry::RegionSampler* sampler = nullptr;
    geometry::RegionSampler owned_sampler({0, 0, 1, 1}, 1, 0);
    if (mode == geometry::GeometryMode::MonteCarlo) {
        owned_sampler = geometry::RegionSampler(layout.region, opts.samples, seed);
        sampler = &owned_sampler;
    }
    std::map<std::vector<double>, StateRates> cache;
    mdp.rates.resize(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        const geometry::CoverageState st{mdp.state_of(idx)};
        const auto radii = st.radii(layout);
        auto it = cache.find(radii);
        if (it == cache.end()) {
            const auto d = sampler ? geometry::decompose_with_sampler(layout, st, *sampler)
                                   : geometry::decompose(layout, st, geometry::GeometryMode::Exact, seed);
            StateRates sr;
            sr.exclusive = d.exclusive_rates;
            for (const auto& z : d.common_regions) {
                std::uint64_t mask = 0;
                for (int s : z.servers) mask |= std::uint64_t{1} << s;
                sr.commons.emplace_back(mask, z.rate);
            }
            sr.covered = d.total_covered_rate;
            it = cache.emplace(radii, std::move(sr)).first;
        }
        mdp.rates[idx] = it->second;
    }
    return mdp;
}

struct MdpSolution {
    double gain_rate = 0.0;     // requests per unit time
    double gain_per_step = 0.0; // per uniformized step
    std::vector<double> h;      // relative values, h[0] = 0
    std::vector<std::vector<int>> policy; // per state, aligned with rates[s].commons; -1 = origin
    double residual = 0.0;      // span of the last value update
    bool converged = false;
    long long iterations = 0;
};

namespace detail {

// One Bellman backup in rate units / nu.  `choice` (optional) fixes the
// per-region assignment instead of maximizing.
inline double backup(const UniformizedMdp& mdp, const std::vector<double>& h, std::size_t idx,
                     const std::vector<long long>& n, const std::vector<std::size_t>& strides,
                     const std::vector<int>* choice) {
    const auto& sr = mdp.rates[idx];
    const std::size_t m = mdp.dims.size();
    double acc = 0.0;
    double outflow = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double mu = mdp.layout.service_rates[i];
        if (n[i] > 0) {
            acc += mu;                                // departure reward
            acc += mu * h[idx - strides[i]];
            outflow += mu;
        }
        if (sr.exclusive[i] > 0.0) {
            acc += sr.exclusive[i] * h[idx + strides[i]];
            outflow += sr.exclusive[i];
        }
    }
    for (std::size_t zi = 0; zi < sr.commons.size(); ++zi) {
        const auto& [mask, rate] = sr.commons[zi];
        if (rate <= 0.0) continue;
        double best;
        if (choice) {
            const int pick = (*choice)[zi];
            best = pick < 0 ? h[idx] : h[idx + strides[static_cast<std::size_t>(pick)]];
        } else {
            best = mdp.allow_origin ? h[idx] : -1e300;
            for (std::size_t i = 0; i < m; ++i)
                if (mask & (std::uint64_t{1} << i)) best = std::max(best, h[idx + strides[i]]);
        }
        acc += rate * best;
        outflow += rate;
    }
    acc += (mdp.nu - outflow) * h[idx];
    return acc / mdp.nu;
}

inline std::vector<std::size_t> make_strides(const std::vector<long long>& dims) {
    std::vector<std::size_t> strides(dims.size(), 1);
    for (std::size_t i = dims.size() - 1; i-- > 0;)
        strides[i] = strides[i + 1] * static_cast<std::size_t>(dims[i + 1]);
    return strides;
}

inline MdpSolution value_iterate(const UniformizedMdp& mdp,
                                 const std::vector<std::vector<int>>* fixed_policy, double tol,
                                 long long max_iter) {
    const std::size_t count = mdp.state_count();
    const auto strides = make_strides(mdp.dims);
    std::vector<double> h(count, 0.0), v(count, 0.0);

    MdpSolution sol;
    std::vector<long long> n(mdp.dims.size(), 0);
    const auto advance = [&](std::vector<long long>& s) {
        for (std::size_t i = s.size(); i-- > 0;) {
            if (++s[i] < mdp.dims[i]) return;
            s[i] = 0;
        }
    };

    for (long long it = 0; it < max_iter; ++it) {
        std::fill(n.begin(), n.end(), 0);
        double dmin = 1e300, dmax = -1e300;
        for (std::size_t idx = 0; idx < count; ++idx, advance(n)) {
            v[idx] = backup(mdp, h, idx, n, strides, fixed_policy ? &(*fixed_policy)[idx] : nullptr);
            const double d = v[idx] - h[idx];
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
        sol.iterations = it + 1;
        sol.residual = dmax - dmin;
        sol.gain_per_step = 0.5 * (dmax + dmin);
        const double v0 = v[0];
        for (std::size_t idx = 0; idx < count; ++idx) h[idx] = v[idx] - v0;
        if (sol.residual < tol) { sol.converged = true; break; }
    }
    sol.gain_rate = sol.gain_per_step * mdp.nu;
    sol.h = std::move(h);
    return sol;
}

} // namespace detail

inline MdpSolution solve(const UniformizedMdp& mdp, double tol = 1e-9, long long max_iter = 1000000) {
    auto sol = detail::value_iterate(mdp, nullptr, tol, max_iter);

    // greedy policy from the converged values; ties to the lowest index,
    // origin only when strictly better
    const auto strides = detail::make_strides(mdp.dims);
    sol.policy.resize(mdp.state_count());
    for (std::size_t idx = 0; idx < mdp.state_count(); ++idx) {
        const auto& sr = mdp.rates[idx];
        auto& per_region = sol.policy[idx];
        per_region.resize(sr.commons.size(), -1);
        for (std::size_t zi = 0; zi < sr.commons.size(); ++zi) {
            const auto mask = sr.commons[zi].first;
            double best = -1e300;
            int pick = -1;
            for (std::size_t i = 0; i < mdp.dims.size(); ++i) {
                if (!(mask & (std::uint64_t{1} << i))) continue;
                const double val = sol.h[idx + strides[i]];
                if (val > best + 1e-15) { best = val; pick = static_cast<int>(i); }
            }
            if (mdp.allow_origin && sol.h[idx] > best + 1e-15) pick = -1;
            per_region[zi] = pick;
        }
    }
    return sol;
}

// Average reward of a fixed per-region assignment policy.
inline double evaluate_policy(const UniformizedMdp& mdp, const std::vector<std::vector<int>>& policy,
                              double tol = 1e-9, long long max_iter = 1000000) {
    if (policy.size() != mdp.state_count())
        throw std::invalid_argument("evaluate_policy: policy must cover all " +
                                    std::to_string(mdp.state_count()) + " states");
    for (std::size_t idx = 0; idx < policy.size(); ++idx) {
        const auto& sr = mdp.rates[idx];
        if (policy[idx].size() != sr.commons.size())
            throw std::invalid_argument("evaluate_policy: undefined action at state " + std::to_string(idx));
        for (std::size_t zi = 0; zi < sr.commons.size(); ++zi) {
            const int pick = policy[idx][zi];
            if (pick < 0) continue; // origin
            if (pick >= static_cast<int>(mdp.dims.size()) ||
                !(sr.commons[zi].first & (std::uint64_t{1} << pick)))
                throw std::invalid_argument("evaluate_policy: infeasible server " + std::to_string(pick) +
                                            " for region at state " + std::to_string(idx));
        }
    }
    return detail::value_iterate(mdp, &policy, tol, max_iter).gain_rate;
}

// State-independent comparison policy: every region with subset mask z goes
// to chooser(z) regardless of queue state.
inline std::vector<std::vector<int>> make_subset_policy(const UniformizedMdp& mdp,
                                                        const std::map<std::uint64_t, int>& subset_server) {
    std::vector<std::vector<int>> policy(mdp.state_count());
    for (std::size_t idx = 0; idx < mdp.state_count(); ++idx) {
        const auto& sr = mdp.rates[idx];
        policy[idx].resize(sr.commons.size());
        for (std::size_t zi = 0; zi < sr.commons.size(); ++zi) {
            const auto mask = sr.commons[zi].first;
            const auto it = subset_server.find(mask);
            int pick = it != subset_server.end() ? it->second : -1;
            if (pick < 0 || !(mask & (std::uint64_t{1} << pick)))
                pick = std::countr_zero(mask); // lowest participant
            policy[idx][zi] = pick;
        }
    }
    return policy;
}

// Sparse executable form for the simulator: per state, subset mask -> server.
struct PolicyTable {
    std::vector<long long> dims;
    std::vector<std::vector<std::pair<std::uint64_t, int>>> entries;

    std::size_t index_of(const std::vector<long long>& n) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (n[i] < 0 || n[i] >= dims[i])
                throw std::invalid_argument("PolicyTable: state out of range");
            idx = idx * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(n[i]);
        }
        return idx;
    }

    // -1 routes to origin; unknown masks fall back to the lowest feasible bit
    int choose(const std::vector<long long>& state, std::uint64_t feasible_mask) const {
        if (feasible_mask == 0) return -1;
        const auto& list = entries[index_of(state)];
        for (const auto& [mask, server] : list)
            if (mask == feasible_mask) return server;
        return std::countr_zero(feasible_mask);
    }
};

inline PolicyTable make_policy_table(const UniformizedMdp& mdp, const MdpSolution& sol) {
    PolicyTable table;
    table.dims = mdp.dims;
    table.entries.resize(mdp.state_count());
    for (std::size_t idx = 0; idx < mdp.state_count(); ++idx) {
        const auto& sr = mdp.rates[idx];
        for (std::size_t zi = 0; zi < sr.commons.size(); ++zi)
            table.entries[idx].emplace_back(sr.commons[zi].first, sol.policy[idx][zi]);
    }
    return table;
}

} // namespace cdn::mdp
