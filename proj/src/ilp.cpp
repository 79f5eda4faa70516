#include <uvol/ilp.hpp>

#include <algorithm>

namespace uvol {

IlpStats& ilp_stats() {
    thread_local IlpStats stats;
    return stats;
}

namespace {

using Bound = std::optional<mpz_class>;

// x_j = offset + sum(sign * x'_col) with every x' >= 0.
struct VarMap {
    mpq_class offset;
    int col = -1;
    int sign = 1;
    int col2 = -1;  // free variables split into a difference
};

class Tableau {
public:
    Tableau(int rows, int cols) : m_(rows), n_(cols), t_(static_cast<size_t>(rows + 1) * (cols + 1)), basis_(rows, -1) {}

    mpq_class& at(int i, int j) { return t_[static_cast<size_t>(i) * (n_ + 1) + j]; }
    mpq_class& rhs(int i) { return at(i, n_); }
    mpq_class& cost(int j) { return at(m_, j); }
    mpq_class& value() { return at(m_, n_); }

    int rows() const { return m_; }
    int cols() const { return n_; }
    std::vector<int>& basis() { return basis_; }

    void pivot(int r, int c) {
        ++ilp_stats().pivots;
        mpq_class inv = 1 / at(r, c);
        for (int j = 0; j <= n_; ++j)
            if (sgn(at(r, j)) != 0) at(r, j) *= inv;
        for (int i = 0; i <= m_; ++i) {
            if (i == r) continue;
            mpq_class f = at(i, c);
            if (sgn(f) == 0) continue;
            for (int j = 0; j <= n_; ++j)
                if (sgn(at(r, j)) != 0) at(i, j) -= f * at(r, j);
        }
        basis_[r] = c;
    }

    // Minimizes the cost row over columns not excluded; false if unbounded.
    bool optimize(const std::vector<bool>& excluded) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < n_; ++j)
                if (!excluded[j] && sgn(cost(j)) < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            mpq_class best;
            for (int i = 0; i < m_; ++i) {
                if (sgn(at(i, enter)) <= 0) continue;
                mpq_class ratio = rhs(i) / at(i, enter);
                if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    // Installs costs and reduces them against the current basis.
    void set_costs(const std::vector<mpq_class>& c) {
        for (int j = 0; j < n_; ++j) cost(j) = c[j];
        value() = 0;
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < 0) continue;
            const mpq_class& cb = c[basis_[i]];
            if (sgn(cb) == 0) continue;
            for (int j = 0; j <= n_; ++j)
                if (sgn(at(i, j)) != 0) at(m_, j) -= cb * at(i, j);
        }
    }

    void drop_row(int r) {
        for (int j = 0; j <= n_; ++j) at(r, j) = 0;
        basis_[r] = -1;
    }

private:
    int m_, n_;
    std::vector<mpq_class> t_;
    std::vector<int> basis_;
};

LpResult solve(const IntegerProgram& p, const std::vector<Bound>& lo, const std::vector<Bound>& hi,
               const std::vector<mpq_class>& cost) {
    ++ilp_stats().lp_solves;
    const int k = p.vars;
    std::vector<VarMap> vars(k);
    int cols = 0;
    struct Row {
        std::vector<std::pair<int, mpq_class>> terms;
        Sense sense;
        mpq_class b;
    };
    std::vector<Row> rows;

    for (int j = 0; j < k; ++j) {
        if (lo[j] && hi[j] && *hi[j] < *lo[j]) return {};
        if (lo[j]) {
            vars[j] = {mpq_class(*lo[j]), cols++, 1, -1};
            if (hi[j]) rows.push_back({{{vars[j].col, mpq_class(1)}}, Sense::kLe, mpq_class(*hi[j] - *lo[j])});
        } else if (hi[j]) {
            vars[j] = {mpq_class(*hi[j]), cols++, -1, -1};
        } else {
            vars[j] = {mpq_class(0), cols, 1, cols + 1};
            cols += 2;
        }
    }
    const int structural = cols;
    for (const auto& r : p.rows) {
        Row row{{}, r.sense, r.b};
        for (int j = 0; j < k; ++j) {
            if (sgn(r.a[j]) == 0) continue;
            row.b -= r.a[j] * vars[j].offset;
            row.terms.emplace_back(vars[j].col, r.a[j] * vars[j].sign);
            if (vars[j].col2 >= 0) row.terms.emplace_back(vars[j].col2, -r.a[j]);
        }
        rows.push_back(std::move(row));
    }

    const int m = static_cast<int>(rows.size());
    int slacks = 0;
    for (const auto& r : rows) slacks += r.sense != Sense::kEq;
    // Worst case one artificial per row.
    const int total = structural + slacks + m;
    Tableau t(m, total);
    std::vector<bool> artificial(total, false);
    int next_slack = structural, next_art = structural + slacks;
    for (int i = 0; i < m; ++i) {
        auto& r = rows[i];
        const bool flip = sgn(r.b) < 0;
        for (auto& [c, v] : r.terms) t.at(i, c) += flip ? -v : v;
        t.rhs(i) = flip ? -r.b : r.b;
        int basic = -1;
        if (r.sense != Sense::kEq) {
            int s = next_slack++;
            int coef = r.sense == Sense::kLe ? 1 : -1;
            if (flip) coef = -coef;
            t.at(i, s) = coef;
            if (coef == 1) basic = s;
        }
        if (basic < 0) {
            basic = next_art++;
            t.at(i, basic) = 1;
            artificial[basic] = true;
        }
        t.basis()[i] = basic;
    }

    std::vector<bool> excluded(total, false);
    for (int j = next_art; j < total; ++j) excluded[j] = true;
    if (next_art > structural + slacks) {
        std::vector<mpq_class> phase1(total);
        for (int j = 0; j < total; ++j)
            if (artificial[j]) phase1[j] = 1;
        t.set_costs(phase1);
        t.optimize(excluded);
        if (sgn(t.value()) != 0) return {};
        for (int i = 0; i < m; ++i) {
            if (t.basis()[i] < 0 || !artificial[t.basis()[i]]) continue;
            int c = -1;
            for (int j = 0; j < structural + slacks; ++j)
                if (sgn(t.at(i, j)) != 0) {
                    c = j;
                    break;
                }
            if (c >= 0) t.pivot(i, c);
            else t.drop_row(i);
        }
        for (int j = 0; j < total; ++j)
            if (artificial[j]) excluded[j] = true;
    }

    std::vector<mpq_class> c2(total);
    mpq_class constant = 0;
    for (int j = 0; j < k; ++j) {
        if (sgn(cost[j]) == 0) continue;
        constant += cost[j] * vars[j].offset;
        c2[vars[j].col] += cost[j] * vars[j].sign;
        if (vars[j].col2 >= 0) c2[vars[j].col2] -= cost[j];
    }
    t.set_costs(c2);
    if (!t.optimize(excluded)) return {LpStatus::kUnbounded, 0, {}};

    std::vector<mpq_class> xs(total);
    for (int i = 0; i < m; ++i)
        if (t.basis()[i] >= 0) xs[t.basis()[i]] = t.rhs(i);
    LpResult res;
    res.status = LpStatus::kOptimal;
    res.x.resize(k);
    for (int j = 0; j < k; ++j) {
        res.x[j] = vars[j].offset + vars[j].sign * xs[vars[j].col];
        if (vars[j].col2 >= 0) res.x[j] -= xs[vars[j].col2];
    }
    res.value = -t.value() + constant;
    return res;
}

mpz_class floor_q(const mpq_class& q) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

mpz_class ceil_q(const mpq_class& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

}  // namespace

LpResult lp_min(const IntegerProgram& p, const std::vector<mpq_class>& cost) {
    std::vector<Bound> lo = p.lower, hi = p.upper;
    return solve(p, lo, hi, cost);
}

std::optional<mpz_class> ilp_min(const IntegerProgram& p, int objective, const std::optional<mpz_class>& at_least) {
    if (objective < 0 || objective >= p.vars) fail(ErrorCode::kParameter, "ilp_min: objective index out of range");
    std::vector<mpq_class> cost(p.vars);
    cost[objective] = 1;

    struct Node {
        std::vector<Bound> lo, hi;
    };
    Node root{p.lower, p.upper};
    if (at_least && (!root.lo[objective] || *root.lo[objective] < *at_least)) root.lo[objective] = *at_least;

    std::optional<mpz_class> best;
    std::vector<Node> stack{std::move(root)};
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        ++ilp_stats().nodes;
        LpResult lp = solve(p, node.lo, node.hi, cost);
        if (lp.status == LpStatus::kInfeasible) continue;
        if (lp.status == LpStatus::kUnbounded) fail(ErrorCode::kUnbounded, "ilp_min: objective unbounded below");
        mpz_class bound = ceil_q(lp.value);
        if (best && bound >= *best) continue;

        int pick = -1;
        mpq_class best_gap = -1;
        for (int j = 0; j < p.vars; ++j) {
            if (lp.x[j].get_den() == 1) continue;
            mpq_class frac = lp.x[j] - mpq_class(floor_q(lp.x[j]));
            mpq_class gap = frac < mpq_class(1, 2) ? frac : 1 - frac;
            if (gap > best_gap) {
                best_gap = gap;
                pick = j;
            }
        }
        if (pick < 0) {
            best = lp.x[objective].get_num();
            continue;
        }
        // The objective is integral, so its value can be rounded up in both children.
        if (!node.lo[objective] || *node.lo[objective] < bound) node.lo[objective] = bound;
        Node down = node, up = std::move(node);
        down.hi[pick] = floor_q(lp.x[pick]);
        up.lo[pick] = ceil_q(lp.x[pick]);
        mpq_class frac = lp.x[pick] - mpq_class(floor_q(lp.x[pick]));
        if (frac < mpq_class(1, 2)) {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        } else {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        }
    }
    return best;
}

namespace {

void list_rec(IntegerProgram& p, int k, std::vector<std::vector<mpz_class>>& out) {
    if (k == 0) {
        std::vector<mpz_class> x(p.vars);
        for (int j = 0; j < p.vars; ++j) x[j] = *p.lower[j];
        out.push_back(std::move(x));
        return;
    }
    const int j = k - 1;
    const Bound saved_lo = p.lower[j], saved_hi = p.upper[j];
    std::optional<mpz_class> a = ilp_min(p, j);
    while (a) {
        p.lower[j] = *a;
        p.upper[j] = *a;
        list_rec(p, k - 1, out);
        p.lower[j] = saved_lo;
        p.upper[j] = saved_hi;
        a = ilp_min(p, j, mpz_class(*a + 1));
    }
}

}  // namespace

std::vector<std::vector<mpz_class>> ilp_list(const IntegerProgram& p) {
    std::vector<std::vector<mpz_class>> out;
    if (p.vars == 0) return out;
    IntegerProgram work = p;
    list_rec(work, p.vars, out);
    return out;
}

}  // namespace uvol
