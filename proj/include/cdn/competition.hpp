#pragma once

// Price competition between K CDNs that announce a performance parameter
// beta (ratio of CDN latency to origin latency, lower is better) and a
// price w.  Content providers have sensitivity theta ~ U[0,1] and pick the
// CDN maximizing theta*(1-beta_k) - w_k, or none if every payoff is
// negative.  Closed-form Nash equilibria are available for K=2 and K=3;
// a damped best-response iteration covers general K.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdn::competition {

struct CdnProfile {
    double beta = 0.5;  // in (0,1)
    double price = 0.0; // >= 0

    void validate() const {
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("CdnProfile: beta must lie in (0,1), got " + std::to_string(beta));
        if (!(price >= 0.0))
            throw std::invalid_argument("CdnProfile: price must be >= 0");
    }
};

// CDNs kept sorted ascending by beta; index 0 is the best performer.
struct MarketInstance {
    std::vector<CdnProfile> cdns;
    double population = 1.0;

    MarketInstance() = default;
    MarketInstance(std::vector<CdnProfile> profiles, double pop)
        : cdns(std::move(profiles)), population(pop) {
        std::stable_sort(cdns.begin(), cdns.end(),
                         [](const CdnProfile& a, const CdnProfile& b) { return a.beta < b.beta; });
        validate();
    }

    std::size_t size() const { return cdns.size(); }

    bool has_tied_betas() const {
        for (std::size_t k = 1; k < cdns.size(); ++k)
            if (cdns[k].beta == cdns[k - 1].beta) return true;
        return false;
    }

    void validate() const {
        if (cdns.empty()) throw std::invalid_argument("MarketInstance: needs at least one CDN");
        if (!(population > 0.0)) throw std::invalid_argument("MarketInstance: population must be > 0");
        for (const auto& c : cdns) c.validate();
    }

    void require_distinct_betas() const {
        if (has_tied_betas())
            throw std::invalid_argument("MarketInstance: equal betas are degenerate for closed-form analysis");
    }
};

struct MarketSplit {
    std::vector<double> thresholds; // descending, theta_k = lower edge of CDN k's interval
    std::vector<double> shares;     // provider mass choosing CDN k
};

struct EquilibriumResult {
    std::vector<double> prices;
    std::vector<double> thresholds;
    std::vector<double> shares;
    std::vector<double> revenues;
    bool converged = false;
    int iterations = 0;
};

// U(theta,k) = theta*(1-beta_k) - w_k
inline double payoff(double theta, const CdnProfile& cdn) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("payoff: theta must lie in [0,1]");
    cdn.validate();
    return theta * (1.0 - cdn.beta) - cdn.price;
}

namespace detail {

// Interval lengths of [0,1] on which each CDN wins the payoff argmax (and
// the payoff is positive).  Works for any price vector; the winning regions
// are contiguous and ordered by index because slopes 1-beta_k strictly
// decrease in k.
inline std::vector<double> winner_lengths(const std::vector<CdnProfile>& cdns) {
    const std::size_t K = cdns.size();
    std::vector<double> cuts{0.0, 1.0};
    for (std::size_t i = 0; i < K; ++i) {
        const double ai = 1.0 - cdns[i].beta;
        const double zi = cdns[i].price / ai;
        if (zi > 0.0 && zi < 1.0) cuts.push_back(zi);
        for (std::size_t j = i + 1; j < K; ++j) {
            const double aj = 1.0 - cdns[j].beta;
            const double t = (cdns[i].price - cdns[j].price) / (ai - aj);
            if (t > 0.0 && t < 1.0) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());

    std::vector<double> len(K, 0.0);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        double best = 0.0;
        std::ptrdiff_t winner = -1;
        for (std::size_t k = 0; k < K; ++k) {
            const double u = mid * (1.0 - cdns[k].beta) - cdns[k].price;
            if (u > best) { best = u; winner = static_cast<std::ptrdiff_t>(k); }
        }
        if (winner >= 0) len[static_cast<std::size_t>(winner)] += hi - lo;
    }
    return len;
}

} // namespace detail

inline MarketSplit market_split(const MarketInstance& market) {
    market.validate();
    market.require_distinct_betas();
    const std::size_t K = market.size();
    const auto len = detail::winner_lengths(market.cdns);

    MarketSplit split;
    split.shares.resize(K);
    split.thresholds.resize(K);
    double upper = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
        split.shares[k] = len[k] * market.population;
        upper -= len[k];
        split.thresholds[k] = std::clamp(upper, 0.0, 1.0);
    }
    return split;
}

inline std::vector<double> revenue(const MarketInstance& market) {
    const auto split = market_split(market);
    std::vector<double> J(market.size());
    for (std::size_t k = 0; k < market.size(); ++k)
        J[k] = split.shares[k] * market.cdns[k].price;
    return J;
}

// Closed-form one-shot best responses for the duopoly; responder is 1 or 2.
inline double best_response_duopoly(double opponent_price, const MarketInstance& market, int responder) {
    market.validate();
    if (market.size() != 2) throw std::invalid_argument("best_response_duopoly: market must have K=2");
    market.require_distinct_betas();
    if (!(opponent_price >= 0.0)) throw std::invalid_argument("best_response_duopoly: opponent price must be >= 0");
    const double b1 = market.cdns[0].beta, b2 = market.cdns[1].beta;
    if (responder == 1) return (b2 - b1 + opponent_price) / 2.0;
    if (responder == 2) return opponent_price * (1.0 - b2) / (2.0 * (1.0 - b1));
    throw std::invalid_argument("best_response_duopoly: responder must be 1 or 2");
}

inline EquilibriumResult equilibrium_duopoly(const MarketInstance& market) {
    market.validate();
    if (market.size() != 2) throw std::invalid_argument("equilibrium_duopoly: market must have K=2");
    market.require_distinct_betas();
    const double b1 = market.cdns[0].beta, b2 = market.cdns[1].beta;
    const double lam = market.population;
    const double D = 4.0 * (1.0 - b1) - (1.0 - b2);

    EquilibriumResult r;
    r.prices = {2.0 * (1.0 - b1) * (b2 - b1) / D, (1.0 - b2) * (b2 - b1) / D};
    r.thresholds = {(r.prices[0] - r.prices[1]) / (b2 - b1), r.prices[1] / (1.0 - b2)};
    r.shares = {2.0 * (1.0 - b1) / D * lam, (1.0 - b1) / D * lam};
    r.revenues = {r.prices[0] * r.shares[0], r.prices[1] * r.shares[1]};
    r.converged = true;
    return r;
}

inline EquilibriumResult equilibrium_triopoly(const MarketInstance& market) {
    market.validate();
    if (market.size() != 3) throw std::invalid_argument("equilibrium_triopoly: market must have K=3");
    market.require_distinct_betas();
    const double b1 = market.cdns[0].beta, b2 = market.cdns[1].beta, b3 = market.cdns[2].beta;
    const double lam = market.population;
    const double d21 = b2 - b1, d31 = b3 - b1, d32 = b3 - b2;
    const double q2 = 1.0 - b2, q3 = 1.0 - b3;
    const double D = 4.0 * q2 * d31 - q3 * d21 - q2 * d32; // denominator; the price forms use 2*D

    EquilibriumResult r;
    r.prices = {(4.0 * q2 * d21 * d31 - q3 * d21 * d21) / (2.0 * D),
                q2 * d21 * d32 / D,
                q3 * d21 * d32 / (2.0 * D)};
    r.thresholds = {(r.prices[0] - r.prices[1]) / d21,
                    (r.prices[1] - r.prices[2]) / d32,
                    r.prices[2] / q3};
    r.shares = {(2.0 * q2 * d31 - 0.5 * q3 * d21) * lam / D,
                (q2 * d31 + 0.5 * q3 * d21) * lam / D,
                0.5 * d21 * d32 * lam / D};
    r.revenues = {r.prices[0] * r.shares[0], r.prices[1] * r.shares[1], r.prices[2] * r.shares[2]};
    r.converged = true;
    return r;
}

namespace detail {

// Revenue of CDN k at trial price w, other prices fixed.
inline double revenue_at(std::vector<CdnProfile> cdns, std::size_t k, double w, double population) {
    cdns[k].price = w;
    const auto len = winner_lengths(cdns);
    return len[k] * population * w;
}

// Coarse scan then golden-section refinement of w -> J_k(w) on [0, 1-beta_k].
inline double best_response_numeric(const std::vector<CdnProfile>& cdns, std::size_t k,
                                    double population, double xtol) {
    const double hi = 1.0 - cdns[k].beta;
    constexpr int kGrid = 256;
    double best_w = 0.0, best_j = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double w = hi * i / kGrid;
        const double j = revenue_at(cdns, k, w, population);
        if (j > best_j) { best_j = j; best_w = w; }
    }
    double a = std::max(0.0, best_w - hi / kGrid);
    double b = std::min(hi, best_w + hi / kGrid);

    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = revenue_at(cdns, k, x1, population), f2 = revenue_at(cdns, k, x2, population);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = revenue_at(cdns, k, x2, population);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = revenue_at(cdns, k, x1, population);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

// Damped Gauss-Seidel best-response dynamics; works for any K >= 1 (K=1 is
// plain monopoly pricing).  Tied betas are Bertrand-degenerate: the result
// comes back flagged as non-converged rather than guessing a split.
inline EquilibriumResult best_response_iteration(const MarketInstance& market, double tol = 1e-9,
                                                 int max_iter = 10000, double damping = 0.5) {
    market.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("best_response_iteration: tol must be > 0");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("best_response_iteration: damping must lie in (0,1]");

    EquilibriumResult r;
    if (market.has_tied_betas()) {
        r.converged = false;
        for (const auto& c : market.cdns) r.prices.push_back(c.price);
        return r;
    }

    std::vector<CdnProfile> cdns = market.cdns;
    const std::size_t K = cdns.size();
    const double xtol = tol / 10.0;

    int it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        double max_change = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double br = detail::best_response_numeric(cdns, k, market.population, xtol);
            const double w_new = cdns[k].price + damping * (br - cdns[k].price);
            max_change = std::max(max_change, std::abs(w_new - cdns[k].price));
            cdns[k].price = w_new;
        }
        if (max_change < tol) { converged = true; ++it; break; }
    }

    MarketInstance at_fixed_point(cdns, market.population);
    const auto split = market_split(at_fixed_point);
    for (std::size_t k = 0; k < K; ++k) r.prices.push_back(cdns[k].price);
    r.thresholds = split.thresholds;
    r.shares = split.shares;
    for (std::size_t k = 0; k < K; ++k) r.revenues.push_back(split.shares[k] * cdns[k].price);
    r.converged = converged;
    r.iterations = it;
    return r;
}

struct RatioSweepRow {
    double beta1;
    double beta2;
    double ratio; // J1*/J2*
};

struct RatioSweepResult {
    std::vector<RatioSweepRow> rows;
    std::vector<double> skipped; // varying-beta values dropped for ordering violations
};

// Equilibrium revenue ratio J1*/J2* across duopolies sharing one fixed beta.
// `which` names the position of the fixed beta (1 or 2).
inline RatioSweepResult ratio_sweep(double beta_fixed, const std::vector<double>& beta_varying, int which) {
    if (!(beta_fixed > 0.0 && beta_fixed < 1.0))
        throw std::invalid_argument("ratio_sweep: fixed beta must lie in (0,1)");
    if (which != 1 && which != 2) throw std::invalid_argument("ratio_sweep: which must be 1 or 2");

    RatioSweepResult out;
    for (double b : beta_varying) {
        if (!(b > 0.0 && b < 1.0))
            throw std::invalid_argument("ratio_sweep: every beta must lie in (0,1)");
        const double b1 = (which == 1) ? beta_fixed : b;
        const double b2 = (which == 1) ? b : beta_fixed;
        if (!(b1 < b2)) {
            out.skipped.push_back(b);
            continue;
        }
        MarketInstance m({{b1, 0.0}, {b2, 0.0}}, 1.0);
        const auto eq = equilibrium_duopoly(m);
        out.rows.push_back({b1, b2, eq.revenues[0] / eq.revenues[1]});
    }
    return out;
}

} // namespace cdn::competition
