#include "toricwk/lp.hpp"

namespace toricwk {

namespace {

// Dense tableau over equality form  T x = rhs, x >= 0, with a basis.
struct Tableau {
    RatMat rows;           // m x ncols
    RatVec rhs;            // m
    std::vector<int> basis;
    int ncols = 0;

    void pivot(int r, int c) {
        Rational inv = 1 / rows[r][c];
        for (auto& v : rows[r]) v *= inv;
        rhs[r] *= inv;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == r || rows[i][c] == 0) continue;
            Rational f = rows[i][c];
            for (int j = 0; j < ncols; ++j)
                if (rows[r][j] != 0) rows[i][j] -= f * rows[r][j];
            rhs[i] -= f * rhs[r];
        }
        basis[r] = c;
    }

    // Maximizes obj.x over allowed columns. Returns false when unbounded.
    bool optimize(const RatVec& obj, const std::vector<bool>& allowed) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < ncols && enter < 0; ++j) {
                if (!allowed[j]) continue;
                bool in_basis = false;
                for (int b : basis)
                    if (b == j) in_basis = true;
                if (in_basis) continue;
                Rational reduced = obj[j];
                for (size_t i = 0; i < rows.size(); ++i)
                    if (rows[i][j] != 0) reduced -= obj[basis[i]] * rows[i][j];
                if (reduced > 0) enter = j;
            }
            if (enter < 0) return true;
            int leave = -1;
            Rational best;
            for (size_t i = 0; i < rows.size(); ++i) {
                if (rows[i][enter] <= 0) continue;
                Rational ratio = rhs[i] / rows[i][enter];
                if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                    leave = static_cast<int>(i);
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult lp_maximize(const RatMat& a, const RatVec& b, const RatVec& c) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(a.size());
    LpResult result;
    if (m == 0) {
        result.x.assign(n, Rational(0));
        if (is_zero(c)) {
            result.status = LpStatus::Optimal;
            result.value = 0;
        } else {
            result.status = LpStatus::Unbounded;
        }
        return result;
    }
    // Columns: x+ (n), x- (n), slack (m), artificial (m).
    const int xs = 0, xm = n, sl = 2 * n, ar = 2 * n + m;
    Tableau t;
    t.ncols = 2 * n + 2 * m;
    t.rows.assign(m, RatVec(t.ncols, Rational(0)));
    t.rhs.assign(m, Rational(0));
    t.basis.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        Rational sign = b[i] < 0 ? -1 : 1;
        for (int j = 0; j < n; ++j) {
            t.rows[i][xs + j] = sign * a[i][j];
            t.rows[i][xm + j] = -sign * a[i][j];
        }
        t.rows[i][sl + i] = sign;
        t.rhs[i] = sign * b[i];
        if (sign > 0) {
            t.basis[i] = sl + i;
        } else {
            t.rows[i][ar + i] = 1;
            t.basis[i] = ar + i;
        }
    }
    std::vector<bool> allowed(t.ncols, true);
    bool need_phase1 = false;
    for (int i = 0; i < m; ++i)
        if (t.basis[i] >= ar) need_phase1 = true;
    if (need_phase1) {
        RatVec obj(t.ncols, Rational(0));
        for (int i = 0; i < m; ++i) obj[ar + i] = -1;
        t.optimize(obj, allowed);
        Rational infeas = 0;
        for (int i = 0; i < m; ++i)
            if (t.basis[i] >= ar) infeas += t.rhs[i];
        if (infeas > 0) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Drive remaining zero-level artificials out of the basis.
        for (int i = 0; i < m; ++i) {
            if (t.basis[i] < ar) continue;
            for (int j = 0; j < ar; ++j) {
                if (t.rows[i][j] != 0) {
                    t.pivot(i, j);
                    break;
                }
            }
        }
    }
    for (int j = ar; j < t.ncols; ++j) allowed[j] = false;
    // Rows whose basic variable is still artificial are redundant; zero them.
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] >= ar) {
            for (auto& v : t.rows[i]) v = 0;
            t.rows[i][t.basis[i]] = 1;
        }
    }
    RatVec obj(t.ncols, Rational(0));
    for (int j = 0; j < n; ++j) {
        obj[xs + j] = c[j];
        obj[xm + j] = -c[j];
    }
    if (!t.optimize(obj, allowed)) {
        result.status = LpStatus::Unbounded;
        return result;
    }
    RatVec full(t.ncols, Rational(0));
    for (int i = 0; i < m; ++i) full[t.basis[i]] = t.rhs[i];
    result.x.assign(n, Rational(0));
    for (int j = 0; j < n; ++j) result.x[j] = full[xs + j] - full[xm + j];
    result.value = dot(c, result.x);
    result.status = LpStatus::Optimal;
    return result;
}

}  // namespace toricwk
