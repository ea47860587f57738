#pragma once

// Shared test-only oracles, independent of the library implementation paths
// they are used to check.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cdn/competition.hpp"

namespace testutil {

// Brute-force market split: argmax of the payoff on a uniform theta grid.
inline std::vector<double> grid_split_shares(const std::vector<cdn::competition::CdnProfile>& cdns,
                                             double population, int points = 1000000) {
    std::vector<double> shares(cdns.size(), 0.0);
    for (int i = 0; i < points; ++i) {
        const double theta = (i + 0.5) / points;
        double best = 0.0;
        int winner = -1;
        for (std::size_t k = 0; k < cdns.size(); ++k) {
            const double u = theta * (1.0 - cdns[k].beta) - cdns[k].price;
            if (u > best) { best = u; winner = static_cast<int>(k); }
        }
        if (winner >= 0) shares[static_cast<std::size_t>(winner)] += 1.0;
    }
    for (auto& s : shares) s *= population / points;
    return shares;
}

// Revenue of CDN k when it charges w and everyone else keeps their price,
// evaluated through the brute-force grid split.
inline double grid_revenue_at(std::vector<cdn::competition::CdnProfile> cdns, std::size_t k, double w,
                              double population, int points = 100000) {
    cdns[k].price = w;
    return grid_split_shares(cdns, population, points)[k] * w;
}

// Circle-circle intersection (lens) area.
inline double lens_area(double r1, double r2, double d) {
    if (d >= r1 + r2) return 0.0;
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        return std::numbers::pi * r * r;
    }
    const double a1 = std::acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1));
    const double a2 = std::acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2));
    return r1 * r1 * (a1 - 0.5 * std::sin(2.0 * a1)) + r2 * r2 * (a2 - 0.5 * std::sin(2.0 * a2));
}

// Stationary distribution of a finite birth-death chain via the generator
// matrix null space (dense Gaussian elimination), not detailed balance.
inline std::vector<double> generator_null_space(const std::vector<double>& birth, double death) {
    const std::size_t n = birth.size() + 1; // states 0..n-1
    // pi * Q = 0 with sum(pi) = 1  ->  solve A x = b where A = Q^T with the
    // last row replaced by ones.
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
        double out = 0.0;
        if (s + 1 < n) { A[s + 1][s] += birth[s]; out += birth[s]; }
        if (s > 0) { A[s - 1][s] += death; out += death; }
        A[s][s] -= out;
    }
    std::vector<double> b(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
    b[n - 1] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || A[r][col] == 0.0) continue;
            const double f = A[r][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[r][j] -= f * A[col][j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = b[i] / A[i][i];
    return pi;
}

} // namespace testutil
