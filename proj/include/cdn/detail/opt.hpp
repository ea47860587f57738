#pragma once

// Small dense solvers for the static-policy optimization: a two-phase
// tableau simplex (Bland's rule) and a primal active-set convex QP.
// Problem sizes here are tiny (tens of variables), so clarity wins over
// sparsity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cdn::opt {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting; tiny diagonal regularization
// keeps nearly-dependent active sets solvable.
inline std::vector<double> solve_dense(Matrix m, std::vector<double> rhs) {
    const std::size_t n = m.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        std::swap(m[piv], m[col]);
        std::swap(rhs[piv], rhs[col]);
        if (std::abs(m[col][col]) < 1e-13) m[col][col] += (m[col][col] >= 0 ? 1e-13 : -1e-13);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) m[r][j] -= f * m[col][j];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    return x;
}

// maximize c'x  s.t.  A x <= b,  E x = f,  x >= 0
struct LinearProgram {
    Matrix A;
    std::vector<double> b;
    Matrix E;
    std::vector<double> f;
    std::vector<double> c;
};

struct LpResult {
    bool feasible = false;
    bool optimal = false;
    double objective = 0.0;
    std::vector<double> x;
};

namespace detail {

struct Tableau {
    Matrix t;                 // rows x (cols+1), last column = rhs
    std::vector<std::size_t> basis;
    std::size_t cols = 0;

    // price the objective row (stored last) over the current basis
    void price_out() {
        auto& obj = t.back();
        for (std::size_t r = 0; r + 1 < t.size(); ++r) {
            const double coef = obj[basis[r]];
            if (coef == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) obj[j] -= coef * t[r][j];
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = t[row][col];
        for (std::size_t j = 0; j <= cols; ++j) t[row][j] /= p;
        for (std::size_t r = 0; r < t.size(); ++r) {
            if (r == row) continue;
            const double f = t[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) t[r][j] -= f * t[row][j];
        }
        basis[row] = col;
    }

    // Bland's rule: enter lowest eligible column, leave lowest basis index
    // among ratio ties.  Returns false when no entering column remains.
    bool iterate(const std::vector<bool>& allowed) {
        constexpr double tol = 1e-10;
        const auto& obj = t.back();
        std::size_t enter = cols;
        for (std::size_t j = 0; j < cols; ++j)
            if (allowed[j] && obj[j] > tol) { enter = j; break; }
        if (enter == cols) return false;

        std::size_t leave = t.size();
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r + 1 < t.size(); ++r) {
            if (t[r][enter] <= tol) continue;
            const double ratio = t[r][cols] / t[r][enter];
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && (leave == t.size() || basis[r] < basis[leave])))
                { best_ratio = ratio; leave = r; }
        }
        if (leave == t.size()) throw std::runtime_error("simplex: unbounded objective");
        pivot(leave, enter);
        return true;
    }
};

} // namespace detail

inline LpResult solve_lp(const LinearProgram& lp) {
    const std::size_t n = lp.c.size();
    const std::size_t m_in = lp.A.size(), m_eq = lp.E.size(), m = m_in + m_eq;
    for (const auto& row : lp.A)
        if (row.size() != n) throw std::invalid_argument("solve_lp: ragged inequality row");
    for (const auto& row : lp.E)
        if (row.size() != n) throw std::invalid_argument("solve_lp: ragged equality row");

    // columns: n structural | m_in slacks | m artificials
    const std::size_t cols = n + m_in + m;
    detail::Tableau tab;
    tab.cols = cols;
    tab.t.assign(m + 1, std::vector<double>(cols + 1, 0.0));
    tab.basis.assign(m, 0);

    for (std::size_t r = 0; r < m; ++r) {
        const bool is_in = r < m_in;
        const auto& src = is_in ? lp.A[r] : lp.E[r - m_in];
        double rhs = is_in ? lp.b[r] : lp.f[r - m_in];
        double sign = 1.0;
        if (rhs < 0.0) { sign = -1.0; rhs = -rhs; }
        for (std::size_t j = 0; j < n; ++j) tab.t[r][j] = sign * src[j];
        if (is_in) tab.t[r][n + r] = sign; // slack
        tab.t[r][n + m_in + r] = 1.0;      // artificial
        tab.t[r][cols] = rhs;
        tab.basis[r] = n + m_in + r;
    }

    // phase 1: maximize -sum(artificials); after pricing, the objective cell
    // tracks the residual infeasibility sum(artificials)
    for (std::size_t r = 0; r < m; ++r) tab.t[m][n + m_in + r] = -1.0;
    tab.price_out();
    std::vector<bool> allowed(cols, true);
    while (tab.iterate(allowed)) {}
    LpResult res;
    if (tab.t[m][cols] > 1e-8) return res; // infeasible
    res.feasible = true;

    // phase 2: original objective, artificials barred from re-entering
    for (std::size_t j = 0; j <= cols; ++j) tab.t[m][j] = 0.0;
    for (std::size_t j = 0; j < n; ++j) tab.t[m][j] = lp.c[j];
    tab.price_out();
    for (std::size_t j = n + m_in; j < cols; ++j) allowed[j] = false;
    while (tab.iterate(allowed)) {}

    res.optimal = true;
    res.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (tab.basis[r] < n) res.x[tab.basis[r]] = tab.t[r][cols];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) res.objective += lp.c[j] * res.x[j];
    return res;
}

// minimize 0.5 x'Hx + g'x  s.t.  first n_eq rows of (A,b) hold with equality,
// the rest as A x <= b.  H must be positive definite (callers add a ridge).
struct QuadraticProgram {
    Matrix H;
    std::vector<double> g;
    Matrix A;
    std::vector<double> b;
    std::size_t n_eq = 0;
};

struct QpResult {
    bool converged = false;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

inline QpResult solve_qp(const QuadraticProgram& qp, std::vector<double> x,
                         double tol = 1e-10, int max_iter = 2000) {
    const std::size_t n = qp.g.size();
    const std::size_t m = qp.A.size();
    if (x.size() != n) throw std::invalid_argument("solve_qp: bad start size");

    const auto dot = [&](const std::vector<double>& a, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a[j] * v[j];
        return s;
    };

    std::vector<bool> active(m, false);
    for (std::size_t r = 0; r < qp.n_eq; ++r) active[r] = true;
    for (std::size_t r = qp.n_eq; r < m; ++r)
        if (dot(qp.A[r], x) >= qp.b[r] - 1e-11) active[r] = true;

    QpResult res;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        std::vector<std::size_t> w;
        for (std::size_t r = 0; r < m; ++r)
            if (active[r]) w.push_back(r);

        // KKT system for the step p keeping the working set tight
        const std::size_t dim = n + w.size();
        Matrix kkt(dim, std::vector<double>(dim, 0.0));
        std::vector<double> rhs(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double gi = qp.g[i];
            for (std::size_t j = 0; j < n; ++j) {
                kkt[i][j] = qp.H[i][j];
                gi += qp.H[i][j] * x[j];
            }
            rhs[i] = -gi;
        }
        for (std::size_t k = 0; k < w.size(); ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                kkt[n + k][j] = qp.A[w[k]][j];
                kkt[j][n + k] = qp.A[w[k]][j];
            }
            kkt[n + k][n + k] = -1e-12; // dual regularization
        }
        const auto sol = solve_dense(std::move(kkt), std::move(rhs));

        double pnorm = 0.0;
        for (std::size_t j = 0; j < n; ++j) pnorm = std::max(pnorm, std::abs(sol[j]));
        if (pnorm <= tol) {
            // multipliers: drop the most negative inequality, else done
            std::size_t drop = m;
            double most_neg = -1e-9;
            for (std::size_t k = 0; k < w.size(); ++k) {
                if (w[k] < qp.n_eq) continue;
                if (sol[n + k] < most_neg) { most_neg = sol[n + k]; drop = w[k]; }
            }
            if (drop == m) { res.converged = true; break; }
            active[drop] = false;
            continue;
        }

        double alpha = 1.0;
        std::size_t block = m;
        for (std::size_t r = qp.n_eq; r < m; ++r) {
            if (active[r]) continue;
            const double ap = dot(qp.A[r], sol);
            if (ap <= 1e-12) continue;
            const double room = (qp.b[r] - dot(qp.A[r], x)) / ap;
            if (room < alpha - 1e-14) { alpha = std::max(0.0, room); block = r; }
        }
        for (std::size_t j = 0; j < n; ++j) x[j] += alpha * sol[j];
        if (block != m) active[block] = true;
    }

    res.x = x;
    res.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.objective += qp.g[i] * x[i];
        for (std::size_t j = 0; j < n; ++j) res.objective += 0.5 * x[i] * qp.H[i][j] * x[j];
    }
    return res;
}

} // namespace cdn::opt
