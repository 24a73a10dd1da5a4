#include "gridres/lp.hpp"

#include <cmath>

namespace gridres::lp {

namespace {

constexpr double kEps = 1e-9;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (n_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, n_); }
    double& cost(std::size_t c) { return at(m_, c); }
    double objective() const { return -at(m_, n_); }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c <= n_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            double* row = &data_[r * (n_ + 1)];
            const double* prow = &data_[pr * (n_ + 1)];
            for (std::size_t c = 0; c <= n_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    /// Runs simplex iterations on the current cost row over columns allowed by
    /// `eligible`. Returns optimal, unbounded or iteration_limit.
    Status optimize(const std::vector<bool>& eligible) {
        const std::size_t max_iter = 50 * (m_ + n_) + 1000;
        std::size_t stall = 0;
        double last_obj = objective();
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            const bool bland = stall > 50;
            std::size_t enter = n_;
            double best = -kEps;
            for (std::size_t c = 0; c < n_; ++c) {
                if (!eligible[c]) continue;
                const double rc = at(m_, c);
                if (rc < best) {
                    enter = c;
                    best = rc;
                    if (bland) break;
                }
            }
            if (enter == n_) return Status::optimal;

            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double a = at(r, enter);
                if (a <= kEps) continue;
                const double ratio = at(r, n_) / a;
                if (ratio < best_ratio - 1e-12 ||
                    (std::abs(ratio - best_ratio) <= 1e-12 && leave < m_ &&
                     basis_[r] < basis_[leave])) {
                    best_ratio = ratio;
                    leave = r;
                }
            }
            if (leave == m_) return Status::unbounded;
            pivot(leave, enter);

            const double obj = objective();
            stall = (obj < last_obj - 1e-12) ? 0 : stall + 1;
            last_obj = std::min(last_obj, obj);
        }
        return Status::iteration_limit;
    }

private:
    std::size_t m_, n_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
};

}  // namespace

Result solve(const Problem& p) {
    const std::size_t nv = p.cost.size();

    // Expand finite upper bounds into explicit rows.
    std::vector<Row> rows = p.rows;
    for (std::size_t j = 0; j < nv; ++j)
        if (std::isfinite(p.upper[j])) rows.push_back({{{j, 1.0}}, Sense::le, p.upper[j]});

    // Normalize to nonnegative rhs.
    for (auto& r : rows) {
        if (r.rhs < 0.0) {
            r.rhs = -r.rhs;
            for (auto& [j, a] : r.coeffs) a = -a;
            if (r.sense == Sense::le) r.sense = Sense::ge;
            else if (r.sense == Sense::ge) r.sense = Sense::le;
        }
    }

    const std::size_t m = rows.size();
    std::size_t n_slack = 0, n_art = 0;
    for (const auto& r : rows) {
        if (r.sense != Sense::eq) ++n_slack;
        if (r.sense != Sense::le) ++n_art;
    }
    const std::size_t n = nv + n_slack + n_art;
    Tableau t(m, n);

    std::size_t slack_col = nv, art_col = nv + n_slack;
    std::vector<bool> is_art(n, false);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = rows[i];
        for (auto [j, a] : r.coeffs) t.at(i, j) += a;
        t.rhs(i) = r.rhs;
        if (r.sense == Sense::le) {
            t.at(i, slack_col) = 1.0;
            t.basis()[i] = slack_col++;
        } else {
            if (r.sense == Sense::ge) t.at(i, slack_col++) = -1.0;
            t.at(i, art_col) = 1.0;
            is_art[art_col] = true;
            t.basis()[i] = art_col++;
        }
    }

    Result res;
    std::vector<bool> eligible(n, true);

    if (n_art > 0) {
        // Phase 1: minimize the sum of artificials.
        for (std::size_t c = 0; c <= n; ++c) t.at(m, c) = 0.0;
        for (std::size_t c = 0; c < n; ++c) t.cost(c) = is_art[c] ? 1.0 : 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (is_art[t.basis()[i]])
                for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= t.at(i, c);
        auto st = t.optimize(eligible);
        if (st == Status::iteration_limit) {
            res.status = st;
            return res;
        }
        if (t.objective() > 1e-7 * (1.0 + std::abs(t.objective()))) {
            res.status = Status::infeasible;
            return res;
        }
        // Drive remaining (zero-level) artificials out of the basis.
        for (std::size_t i = 0; i < m; ++i) {
            if (!is_art[t.basis()[i]]) continue;
            for (std::size_t c = 0; c < n; ++c) {
                if (!is_art[c] && std::abs(t.at(i, c)) > 1e-7) {
                    t.pivot(i, c);
                    break;
                }
            }
        }
        for (std::size_t c = 0; c < n; ++c)
            if (is_art[c]) eligible[c] = false;
    }

    // Phase 2.
    for (std::size_t c = 0; c <= n; ++c) t.at(m, c) = 0.0;
    for (std::size_t j = 0; j < nv; ++j) t.cost(j) = p.cost[j];
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t b = t.basis()[i];
        if (b < nv && p.cost[b] != 0.0) {
            const double cb = p.cost[b];
            for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= cb * t.at(i, c);
        }
    }
    auto st = t.optimize(eligible);
    res.status = st;
    if (st != Status::optimal) return res;

    res.x.assign(nv, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis()[i] < nv) res.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
    res.objective = 0.0;
    for (std::size_t j = 0; j < nv; ++j) res.objective += p.cost[j] * res.x[j];
    return res;
}

}  // namespace gridres::lp
