#pragma once

// Static request routing.  Stage 1 splits common-area rates so the total
// served rate gamma = sum_i min(lambda_i(0), mu_i) is maximal (a linear
// program over split fractions P_iz and served rates s_i).  Stage 2 keeps
// gamma fixed and minimizes the summed per-region variance of participant
// utilizations lambda_i(0)/mu_i (a convex QP).  The resulting plan is then
// materialized into a state-independent point -> server map by cutting each
// common region into slabs whose measures match the split fractions.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "cdn/detail/opt.hpp"
#include "cdn/geometry.hpp"

namespace cdn::routing {

struct AssignmentPlan {
    std::vector<double> admit_fractions;              // I_i
    std::vector<geometry::CommonRegion> regions;      // common regions being split
    std::vector<std::vector<double>> split_fractions; // P_iz aligned with regions[z].servers
    std::vector<double> server_rates;                 // lambda_i(0)
    double gamma = 0.0;                               // stage-1 served rate
    double variance_objective = 0.0;
    bool stage1_certified = true;

    double split_for(std::size_t region_index, int server) const {
        const auto& z = regions[region_index];
        for (std::size_t k = 0; k < z.servers.size(); ++k)
            if (z.servers[k] == server) return split_fractions[region_index][k];
        return 0.0;
    }
};

namespace detail {

struct VarLayout {
    std::vector<std::vector<std::size_t>> pvar; // [region][participant] -> column
    std::size_t n_p = 0;
    std::size_t n_servers = 0;
    std::size_t svar(std::size_t i) const { return n_p + i; }
    std::size_t total() const { return n_p + n_servers; }
};

inline VarLayout make_var_layout(const geometry::AreaDecomposition& decomp) {
    VarLayout v;
    v.n_servers = decomp.exclusive_rates.size();
    v.pvar.resize(decomp.common_regions.size());
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z)
        for (std::size_t k = 0; k < decomp.common_regions[z].servers.size(); ++k)
            v.pvar[z].push_back(v.n_p++);
    return v;
}

inline void validate_inputs(const geometry::AreaDecomposition& decomp, const std::vector<double>& mu) {
    if (mu.size() != decomp.exclusive_rates.size())
        throw std::invalid_argument("static policy: mu length must match decomposition");
    for (double m : mu)
        if (!(m > 0.0)) throw std::invalid_argument("static policy: service rates must be > 0");
    for (double r : decomp.exclusive_rates)
        if (!(r >= 0.0)) throw std::invalid_argument("static policy: negative exclusive rate");
    for (const auto& z : decomp.common_regions) {
        if (!(z.rate >= 0.0)) throw std::invalid_argument("static policy: negative common rate");
        if (z.servers.size() < 2) throw std::invalid_argument("static policy: common region needs >= 2 servers");
    }
}

// shared constraint rows: s_i - sum_z P_iz phi_z <= Phi_i ; s_i <= mu_i ;
// sum_i P_iz <= 1 ; P_iz <= 1  (non-negativity added separately when needed)
inline void append_feasibility_rows(const geometry::AreaDecomposition& decomp,
                                    const std::vector<double>& mu, const VarLayout& v,
                                    cdn::opt::Matrix& A, std::vector<double>& b) {
    const std::size_t m = mu.size();
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(v.total(), 0.0);
        row[v.svar(i)] = 1.0;
        for (std::size_t z = 0; z < decomp.common_regions.size(); ++z) {
            const auto& zr = decomp.common_regions[z];
            for (std::size_t k = 0; k < zr.servers.size(); ++k)
                if (zr.servers[k] == static_cast<int>(i)) row[v.pvar[z][k]] = -zr.rate;
        }
        A.push_back(std::move(row));
        b.push_back(decomp.exclusive_rates[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(v.total(), 0.0);
        row[v.svar(i)] = 1.0;
        A.push_back(std::move(row));
        b.push_back(mu[i]);
    }
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z) {
        std::vector<double> row(v.total(), 0.0);
        for (const auto col : v.pvar[z]) row[col] = 1.0;
        A.push_back(std::move(row));
        b.push_back(1.0);
    }
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z)
        for (const auto col : v.pvar[z]) {
            std::vector<double> row(v.total(), 0.0);
            row[col] = 1.0;
            A.push_back(std::move(row));
            b.push_back(1.0);
        }
}

inline std::vector<double> rates_from_splits(const geometry::AreaDecomposition& decomp,
                                             const std::vector<std::vector<double>>& splits) {
    std::vector<double> lambda = decomp.exclusive_rates;
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z) {
        const auto& zr = decomp.common_regions[z];
        for (std::size_t k = 0; k < zr.servers.size(); ++k)
            lambda[static_cast<std::size_t>(zr.servers[k])] += splits[z][k] * zr.rate;
    }
    return lambda;
}

inline double variance_objective_value(const geometry::AreaDecomposition& decomp,
                                       const std::vector<double>& mu,
                                       const std::vector<double>& lambda) {
    double total = 0.0;
    for (const auto& z : decomp.common_regions) {
        const double k = static_cast<double>(z.servers.size());
        double mean = 0.0;
        for (int s : z.servers) mean += lambda[static_cast<std::size_t>(s)] / mu[static_cast<std::size_t>(s)];
        mean /= k;
        double var = 0.0;
        for (int s : z.servers) {
            const double u = lambda[static_cast<std::size_t>(s)] / mu[static_cast<std::size_t>(s)];
            var += (u - mean) * (u - mean);
        }
        total += var / k;
    }
    return total;
}

inline AssignmentPlan plan_from_solution(const geometry::AreaDecomposition& decomp,
                                         const std::vector<double>& mu, const VarLayout& v,
                                         const std::vector<double>& x) {
    AssignmentPlan plan;
    plan.regions = decomp.common_regions;
    plan.split_fractions.resize(decomp.common_regions.size());
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z)
        for (const auto col : v.pvar[z])
            plan.split_fractions[z].push_back(std::clamp(x[col], 0.0, 1.0));
    plan.server_rates = rates_from_splits(decomp, plan.split_fractions);
    plan.admit_fractions.resize(mu.size());
    plan.gamma = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double lam = plan.server_rates[i];
        plan.admit_fractions[i] = lam > mu[i] ? mu[i] / lam : 1.0;
        plan.gamma += std::min(lam, mu[i]);
    }
    plan.variance_objective = variance_objective_value(decomp, mu, plan.server_rates);
    return plan;
}

} // namespace detail

struct Stage1Result {
    double gamma = 0.0;
    AssignmentPlan plan;
};

inline Stage1Result solve_stage1(const geometry::AreaDecomposition& decomp, const std::vector<double>& mu) {
    detail::validate_inputs(decomp, mu);
    const auto v = detail::make_var_layout(decomp);

    cdn::opt::LinearProgram lp;
    detail::append_feasibility_rows(decomp, mu, v, lp.A, lp.b);
    lp.c.assign(v.total(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) lp.c[v.svar(i)] = 1.0;

    const auto sol = cdn::opt::solve_lp(lp);
    if (!sol.optimal) throw std::runtime_error("solve_stage1: linear program failed");

    Stage1Result out;
    out.plan = detail::plan_from_solution(decomp, mu, v, sol.x);
    out.gamma = out.plan.gamma;
    return out;
}

inline AssignmentPlan solve_stage2(const geometry::AreaDecomposition& decomp, const std::vector<double>& mu,
                                   double gamma) {
    detail::validate_inputs(decomp, mu);
    const auto v = detail::make_var_layout(decomp);
    const auto stage1 = solve_stage1(decomp, mu);

    cdn::opt::QuadraticProgram qp;
    qp.H.assign(v.total(), std::vector<double>(v.total(), 0.0));
    qp.g.assign(v.total(), 0.0);

    // d u_i / d x_col and the constant part u0_i = Phi_i / mu_i
    const std::size_t m = mu.size();
    std::vector<std::vector<double>> du(m, std::vector<double>(v.total(), 0.0));
    std::vector<double> u0(m);
    for (std::size_t i = 0; i < m; ++i) u0[i] = decomp.exclusive_rates[i] / mu[i];
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z) {
        const auto& zr = decomp.common_regions[z];
        for (std::size_t k = 0; k < zr.servers.size(); ++k)
            du[static_cast<std::size_t>(zr.servers[k])][v.pvar[z][k]] = zr.rate / mu[static_cast<std::size_t>(zr.servers[k])];
    }
    // sum_z (1/k) sum_{i in z} (u_i - mean_z)^2 expands to quadratic
    // coefficients c_ij = delta_ij/k - 1/k^2 over participants of z
    for (const auto& z : decomp.common_regions) {
        const double k = static_cast<double>(z.servers.size());
        for (int si : z.servers) {
            for (int sj : z.servers) {
                const double cij = (si == sj ? 1.0 / k : 0.0) - 1.0 / (k * k);
                if (cij == 0.0) continue;
                const auto& di = du[static_cast<std::size_t>(si)];
                const auto& dj = du[static_cast<std::size_t>(sj)];
                for (std::size_t p = 0; p < v.total(); ++p) {
                    if (di[p] != 0.0) {
                        for (std::size_t q = 0; q < v.total(); ++q)
                            if (dj[q] != 0.0) qp.H[p][q] += 2.0 * cij * di[p] * dj[q];
                        qp.g[p] += 2.0 * cij * di[p] * u0[static_cast<std::size_t>(sj)];
                    }
                }
            }
        }
    }
    // small ridge keeps H positive definite; it perturbs the optimum by
    // O(1e-9) and deterministically favors small split vectors among ties
    for (std::size_t p = 0; p < v.total(); ++p) qp.H[p][p] += 2e-9;

    detail::append_feasibility_rows(decomp, mu, v, qp.A, qp.b);
    for (std::size_t p = 0; p < v.total(); ++p) { // non-negativity
        std::vector<double> row(v.total(), 0.0);
        row[p] = -1.0;
        qp.A.push_back(std::move(row));
        qp.b.push_back(0.0);
    }
    // equality sum_i s_i = gamma, kept first
    std::vector<double> eq(v.total(), 0.0);
    for (std::size_t i = 0; i < m; ++i) eq[v.svar(i)] = 1.0;
    qp.A.insert(qp.A.begin(), eq);
    qp.b.insert(qp.b.begin(), gamma);
    qp.n_eq = 1;

    // feasible start from stage 1
    std::vector<double> x0(v.total(), 0.0);
    for (std::size_t z = 0; z < decomp.common_regions.size(); ++z)
        for (std::size_t k = 0; k < v.pvar[z].size(); ++k)
            x0[v.pvar[z][k]] = stage1.plan.split_fractions[z][k];
    for (std::size_t i = 0; i < m; ++i)
        x0[v.svar(i)] = std::min(stage1.plan.server_rates[i], mu[i]);

    const auto sol = cdn::opt::solve_qp(qp, std::move(x0), 1e-11, 5000);
    auto plan = detail::plan_from_solution(decomp, mu, v, sol.x);
    plan.stage1_certified = sol.converged && std::abs(plan.gamma - gamma) <= 1e-8 * std::max(1.0, gamma);
    if (!plan.stage1_certified && stage1.plan.variance_objective <= plan.variance_objective)
        return stage1.plan; // fall back to the certified stage-1 vertex
    return plan;
}

inline AssignmentPlan solve_static(const geometry::AreaDecomposition& decomp, const std::vector<double>& mu) {
    const auto stage1 = solve_stage1(decomp, mu);
    return solve_stage2(decomp, mu, stage1.gamma);
}

// --- materialization ------------------------------------------------------

struct RegionCut {
    std::vector<int> servers;  // slab owners, ascending server index
    geometry::Point axis;      // unit projection direction
    std::vector<double> cuts;  // upper projected bound per slab; +inf = rest
};

// State-independent point -> server map.  Membership is evaluated against
// the empty-state radii; common regions are sliced into slabs along a fixed
// axis at sample quantiles matching the split fractions.
struct RegionAssignment {
    std::vector<geometry::Point> positions;
    std::vector<double> empty_radii;
    std::vector<double> admit_fractions;
    std::map<std::uint64_t, RegionCut> cuts; // keyed by membership mask

    std::uint64_t membership(const geometry::Point& p) const {
        std::uint64_t mask = 0;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const double dx = p.x - positions[i].x, dy = p.y - positions[i].y;
            if (dx * dx + dy * dy <= empty_radii[i] * empty_radii[i]) mask |= std::uint64_t{1} << i;
        }
        return mask;
    }

    // -1 means the origin serves this point
    int server_for(const geometry::Point& p) const {
        const auto mask = membership(p);
        if (mask == 0) return -1;
        if (std::popcount(mask) == 1) return std::countr_zero(mask);
        const auto it = cuts.find(mask);
        if (it == cuts.end()) return std::countr_zero(mask); // vanishing region: lowest participant
        const auto& cut = it->second;
        const double t = p.x * cut.axis.x + p.y * cut.axis.y;
        for (std::size_t k = 0; k < cut.servers.size(); ++k)
            if (t <= cut.cuts[k]) return cut.servers[k];
        return -1; // unassigned leftover when sum_i P_iz < 1
    }
};

inline RegionAssignment materialize(const AssignmentPlan& plan, const geometry::ServerLayout& layout,
                                    std::uint64_t seed, std::size_t samples = geometry::kDefaultMcSamples) {
    layout.validate();
    RegionAssignment out;
    out.positions = layout.positions;
    out.admit_fractions = plan.admit_fractions;
    out.empty_radii.resize(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) out.empty_radii[i] = geometry::radius(layout, i, 0);

    const geometry::RegionSampler sampler(layout.region, samples, seed);
    for (std::size_t z = 0; z < plan.regions.size(); ++z) {
        const auto& zone = plan.regions[z];
        std::uint64_t mask = 0;
        for (int s : zone.servers) mask |= std::uint64_t{1} << s;

        RegionCut cut;
        cut.servers = zone.servers;
        const auto& pa = layout.positions[static_cast<std::size_t>(zone.servers.front())];
        const auto& pb = layout.positions[static_cast<std::size_t>(zone.servers.back())];
        const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
        cut.axis = len > 1e-12 ? geometry::Point{(pb.x - pa.x) / len, (pb.y - pa.y) / len}
                               : geometry::Point{1.0, 0.0};

        std::vector<double> ts;
        for (const auto& p : sampler.points())
            if (out.membership(p) == mask) ts.push_back(p.x * cut.axis.x + p.y * cut.axis.y);
        std::sort(ts.begin(), ts.end());

        double cumulative = 0.0;
        for (std::size_t k = 0; k < zone.servers.size(); ++k) {
            cumulative += plan.split_fractions[z][k];
            if (cumulative <= 1e-12) {
                cut.cuts.push_back(-std::numeric_limits<double>::infinity());
            } else if (ts.empty() || cumulative >= 1.0 - 1e-9) {
                cut.cuts.push_back(std::numeric_limits<double>::infinity());
            } else {
                const auto idx = static_cast<std::size_t>(std::clamp(
                    std::ceil(cumulative * static_cast<double>(ts.size())) - 1.0, 0.0,
                    static_cast<double>(ts.size()) - 1.0));
                cut.cuts.push_back(ts[idx]);
            }
        }
        out.cuts[mask] = std::move(cut);
    }
    return out;
}

} // namespace cdn::routing
