#pragma once

// Single CDN server as a finite birth-death chain.  The queue can never
// exceed n_max = ceil(psi*mu - 1): at that length the serving radius is zero
// and arrivals stop.  Arrival rates follow the shrinking coverage disk,
// lambda(n) = lambda(0) * (1 - n/(psi*mu - 1))^2, optionally reduced by
// ceded-area rates when the server shares common areas under a static plan.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cdn::queueing {

struct BirthDeathChain {
    double mu = 1.0;
    double psi = 1.0;
    double lambda0 = 0.0;              // arrival rate at the empty state (before ceding)
    std::vector<double> ceded;         // ceded-area rates per state, 0 beyond the vector
    std::vector<double> custom_arrivals; // if non-empty, overrides the parametric profile

    static BirthDeathChain from_peak(double lambda0, double mu, double psi) {
        BirthDeathChain c;
        c.lambda0 = lambda0;
        c.mu = mu;
        c.psi = psi;
        c.validate();
        return c;
    }

    static BirthDeathChain from_layout(double areal_rate, double speed, double psi, double mu) {
        const double r0 = speed * std::max(0.0, psi - 1.0 / mu);
        return from_peak(areal_rate * std::numbers::pi * r0 * r0, mu, psi);
    }

    static BirthDeathChain from_arrivals(std::vector<double> arrivals, double mu) {
        BirthDeathChain c;
        c.mu = mu;
        c.custom_arrivals = std::move(arrivals);
        c.psi = (static_cast<double>(c.custom_arrivals.size()) + 1.0) / mu;
        c.lambda0 = c.custom_arrivals.empty() ? 0.0 : c.custom_arrivals.front();
        c.validate();
        return c;
    }

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("BirthDeathChain: mu must be > 0");
        if (!(psi > 0.0)) throw std::invalid_argument("BirthDeathChain: psi must be > 0");
        if (!(lambda0 >= 0.0)) throw std::invalid_argument("BirthDeathChain: lambda0 must be >= 0");
        for (double a : custom_arrivals)
            if (!(a >= 0.0)) throw std::invalid_argument("BirthDeathChain: arrival rates must be >= 0");
    }

    long long n_max() const {
        if (!custom_arrivals.empty()) return static_cast<long long>(custom_arrivals.size());
        return std::max<long long>(0, static_cast<long long>(std::ceil(psi * mu - 1.0)));
    }

    double arrival(long long n) const {
        if (n < 0) throw std::invalid_argument("BirthDeathChain: state must be >= 0");
        if (!custom_arrivals.empty())
            return n < static_cast<long long>(custom_arrivals.size()) ? custom_arrivals[static_cast<std::size_t>(n)] : 0.0;
        const double span = psi * mu - 1.0;
        if (span <= 0.0) return 0.0;
        const double shape = std::max(0.0, 1.0 - static_cast<double>(n) / span);
        double lam = lambda0 * shape * shape;
        if (n < static_cast<long long>(ceded.size())) lam -= ceded[static_cast<std::size_t>(n)];
        return std::max(0.0, lam);
    }

    // lambda^c = c*lambda, mu^c = c*mu, psi and geometry fixed.
    BirthDeathChain scaled(double c) const {
        if (!(c >= 1.0)) throw std::invalid_argument("BirthDeathChain: scaling factor must be >= 1");
        BirthDeathChain s = *this;
        s.mu *= c;
        s.lambda0 *= c;
        for (auto& a : s.ceded) a *= c;
        for (auto& a : s.custom_arrivals) a *= c;
        return s;
    }
};

namespace detail {

// Cumulative log-products log prod_{l<n} lambda(l)/mu for n = 0..n_max,
// truncated once terms can no longer matter:
//  - 80 nats below the running peak: past the peak the terms decrease
//    monotonically (lambda(n) is non-increasing), so the neglected tail is
//    bounded by n_max * exp(peak-80), i.e. < 4e-26 of the peak term even at
//    n_max = 2e9;
//  - 50 nats above zero: then p0 < exp(-50) and mu*(1-p0) is mu to double
//    precision, so downstream throughput is unaffected.
inline std::vector<double> log_terms(const BirthDeathChain& chain, bool allow_truncation) {
    const long long nmax = chain.n_max();
    const double logmu = std::log(chain.mu);
    std::vector<double> terms{0.0};
    double cum = 0.0, peak = 0.0;
    for (long long n = 0; n < nmax; ++n) {
        const double lam = chain.arrival(n);
        if (lam <= 0.0) break;
        cum += std::log(lam) - logmu;
        peak = std::max(peak, cum);
        if (allow_truncation && cum < peak - 80.0) break;
        terms.push_back(cum);
        if (allow_truncation && cum > 50.0) break;
    }
    return terms;
}

inline double log_sum_exp(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end(), std::greater<double>());
    const double m = terms.front();
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

} // namespace detail

// P(empty).  Safe for n_max up to ~2e9 thanks to truncation.
inline double empty_probability(const BirthDeathChain& chain) {
    chain.validate();
    auto terms = detail::log_terms(chain, true);
    if (!terms.empty() && terms.back() > 50.0) return std::exp(-terms.back());
    return std::exp(-detail::log_sum_exp(std::move(terms)));
}

inline constexpr long long kMaxMaterializedStates = 1 << 26;

inline std::vector<double> stationary_distribution(const BirthDeathChain& chain) {
    chain.validate();
    const long long nmax = chain.n_max();
    if (nmax + 1 > kMaxMaterializedStates)
        throw std::invalid_argument("stationary_distribution: chain too large to materialize; "
                                    "use empty_probability/throughput");
    auto terms = detail::log_terms(chain, false);
    const double logz = detail::log_sum_exp(terms);
    std::vector<double> p(static_cast<std::size_t>(nmax) + 1, 0.0);
    for (std::size_t n = 0; n < terms.size(); ++n) p[n] = std::exp(terms[n] - logz);
    return p;
}

// J1 = mu * (1 - p0)
inline double throughput(const BirthDeathChain& chain) {
    return chain.mu * (1.0 - empty_probability(chain));
}

// J_ub = min(lambda(0), mu)
inline double upper_bound(const BirthDeathChain& chain) {
    chain.validate();
    return std::min(chain.arrival(0), chain.mu);
}

struct ScalingRow {
    double c = 1.0;
    double throughput = 0.0;
    double upper_bound = 0.0;
    double ratio = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
};

inline ScalingReport scaling_sweep(const BirthDeathChain& chain, const std::vector<double>& factors) {
    chain.validate();
    ScalingReport report;
    for (double c : factors) {
        const auto scaled = chain.scaled(c);
        ScalingRow row;
        row.c = c;
        row.throughput = throughput(scaled);
        row.upper_bound = upper_bound(scaled);
        row.ratio = row.upper_bound > 0.0 ? row.throughput / row.upper_bound : 0.0;
        report.rows.push_back(row);
    }
    return report;
}

} // namespace cdn::queueing
