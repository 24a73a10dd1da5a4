#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace gridres::lp {

enum class Sense { le, ge, eq };

struct Row {
    std::vector<std::pair<std::size_t, double>> coeffs;
    Sense sense = Sense::le;
    double rhs = 0.0;
};

/// minimize cost'x  subject to rows, 0 <= x <= upper.
struct Problem {
    std::vector<double> cost;
    std::vector<double> upper;  // +infinity for unbounded above
    std::vector<Row> rows;

    std::size_t add_var(double c, double ub = std::numeric_limits<double>::infinity()) {
        cost.push_back(c);
        upper.push_back(ub);
        return cost.size() - 1;
    }
    void add_row(std::vector<std::pair<std::size_t, double>> coeffs, Sense s, double rhs) {
        rows.push_back({std::move(coeffs), s, rhs});
    }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/// Dense two-phase tableau simplex. Dantzig pricing, falling back to Bland's
/// rule after a run of degenerate pivots.
Result solve(const Problem& problem);

}  // namespace gridres::lp
