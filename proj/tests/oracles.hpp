#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls into the solver it is checking.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "gridres/dynamics.hpp"
#include "gridres/machine.hpp"
#include "gridres/metrics.hpp"
#include "gridres/network.hpp"
#include "gridres/rng.hpp"

namespace oracle {

using namespace gridres;

// ---- two-bus power flow ----------------------------------------------------

/// Load bus voltage of a slack (v1 at angle 0) feeding a PQ load s = p + jq
/// (per unit, consumed) over series impedance z, high-voltage root.
inline std::complex<double> two_bus_voltage(double v1, std::complex<double> z, std::complex<double> s) {
    const double r = z.real(), x = z.imag(), p = s.real(), q = s.imag();
    const double b = 2 * (r * p + x * q) - v1 * v1;
    const double c = std::norm(z) * std::norm(s);
    const double v2sq = (-b + std::sqrt(b * b - 4 * c)) / 2;
    const double v = std::sqrt(v2sq);
    // v1 * v * e^{-j theta} = v^2 + z * conj(s)
    const double theta = -std::arg(std::complex<double>(v2sq, 0) + z * std::conj(s));
    return std::polar(v, theta);
}

inline Network two_bus_case(double r, double x, double p_mw, double q_mvar) {
    Network net;
    net.name = "two_bus";
    net.base_mva = 100;
    Bus a;
    a.id = 1;
    a.area = 1;
    a.base_kv = 138;
    a.kind = BusKind::slack;
    a.voltage_setpoint = 1.0;
    Bus b = a;
    b.id = 2;
    b.kind = BusKind::pq;
    net.buses = {a, b};
    net.reindex();
    Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.resistance = r;
    br.reactance = x;
    br.rating_lte = 1000;
    br.rating_ste = 1200;
    net.branches = {br};
    Generator g;
    g.bus = 1;
    g.p_max = 1000;
    g.q_min = -1000;
    g.q_max = 1000;
    g.machine_ref = "U400";
    net.generators = {g};
    Load l;
    l.bus = 2;
    l.p_nominal = p_mw;
    l.q_nominal = q_mvar;
    net.loads = {l};
    return net;
}

// ---- DC minimum shed by exhaustive search ----------------------------------

/// Dense Gaussian elimination with partial pivoting; solves a x = b in place.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Line flow sensitivities to a unit injection at each bus (withdrawn at bus 0),
/// lossless DC model over the in-service branches. Rows follow `lines`.
inline std::vector<std::vector<double>> dc_ptdf(const Network& net, std::vector<std::size_t>& lines) {
    const std::size_t n = net.buses.size();
    lines.clear();
    for (std::size_t l = 0; l < net.branches.size(); ++l)
        if (net.branches[l].in_service()) lines.push_back(l);
    std::vector<std::vector<double>> bmat(n, std::vector<double>(n, 0.0));
    for (auto l : lines) {
        const auto& br = net.branches[l];
        auto f = net.bus_index(br.from_bus), t = net.bus_index(br.to_bus);
        double y = 1.0 / br.reactance;
        bmat[f][f] += y;
        bmat[t][t] += y;
        bmat[f][t] -= y;
        bmat[t][f] -= y;
    }
    std::vector<std::vector<double>> ptdf(lines.size(), std::vector<double>(n, 0.0));
    if (n < 2) return ptdf;
    std::vector<std::vector<double>> red(n - 1, std::vector<double>(n - 1));
    for (std::size_t r = 1; r < n; ++r)
        for (std::size_t c = 1; c < n; ++c) red[r - 1][c - 1] = bmat[r][c];
    for (std::size_t inj = 1; inj < n; ++inj) {
        std::vector<double> rhs(n - 1, 0.0);
        rhs[inj - 1] = 1.0;
        auto th = gauss_solve(red, rhs);
        th.insert(th.begin(), 0.0);
        for (std::size_t k = 0; k < lines.size(); ++k) {
            const auto& br = net.branches[lines[k]];
            auto f = net.bus_index(br.from_bus), t = net.bus_index(br.to_bus);
            ptdf[k][inj] = (th[f] - th[t]) / br.reactance;
        }
    }
    return ptdf;
}

/// Largest x[0] over {x : a x <= b} in one or two variables by vertex enumeration.
inline std::optional<double> max_first(const std::vector<std::vector<double>>& a, const std::vector<double>& b) {
    const std::size_t dim = a.empty() ? 0 : a[0].size();
    auto feasible = [&](const std::vector<double>& x) {
        for (std::size_t r = 0; r < a.size(); ++r) {
            double s = 0;
            for (std::size_t k = 0; k < dim; ++k) s += a[r][k] * x[k];
            if (s > b[r] + 1e-9) return false;
        }
        return true;
    };
    std::optional<double> best;
    if (dim == 1) {
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (std::abs(a[r][0]) < 1e-14) continue;
            std::vector<double> x{b[r] / a[r][0]};
            if (feasible(x) && (!best || x[0] > *best)) best = x[0];
        }
        return best;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            double det = a[i][0] * a[j][1] - a[i][1] * a[j][0];
            if (std::abs(det) < 1e-14) continue;
            std::vector<double> x{(b[i] * a[j][1] - a[i][1] * b[j]) / det,
                                  (a[i][0] * b[j] - b[i] * a[j][0]) / det};
            if (feasible(x) && (!best || x[0] > *best)) best = x[0];
        }
    return best;
}

/// Minimum total shed (MW) of a connected lossless DC system with one or two
/// generator buses and up to three load buses. All but the last load walk a
/// `step` MW grid; the last load and the first generator are then optimized
/// exactly on the remaining one- or two-variable polytope.
inline double brute_force_min_shed(const Network& net, const std::vector<BusDemand>& demand, double step = 0.1) {
    std::vector<std::size_t> lines;
    auto ptdf = dc_ptdf(net, lines);
    std::vector<std::size_t> gbus;
    std::vector<double> cap;
    for (const auto& g : net.generators) {
        if (!g.online()) continue;
        auto b = net.bus_index(g.bus);
        auto it = std::find(gbus.begin(), gbus.end(), b);
        if (it == gbus.end()) {
            gbus.push_back(b);
            cap.push_back(g.p_max);
        } else {
            cap[static_cast<std::size_t>(it - gbus.begin())] += g.p_max;
        }
    }
    std::vector<std::size_t> lbus;
    std::vector<double> d;
    for (const auto& x : demand) {
        lbus.push_back(net.bus_index(x.bus));
        d.push_back(x.p_mw);
    }
    const std::size_t k = lbus.size();
    const double total = std::accumulate(d.begin(), d.end(), 0.0);
    if (k == 0) return 0.0;

    std::vector<int> steps(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) steps[i] = static_cast<int>(std::floor(d[i] / step + 1e-9)) + 1;  // last point clamps to d
    std::vector<int> idx(k - 1, 0);
    double best_served = 0.0;
    const std::size_t last = k - 1;
    const bool two = gbus.size() == 2;
    while (true) {
        std::vector<double> s(k - 1);
        double fixed = 0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            s[i] = std::min(d[i], idx[i] * step);
            fixed += s[i];
        }
        // Variables: y = (served_last[, g1]); g_last = fixed + served_last - g1.
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        const std::size_t dim = two ? 2 : 1;
        auto row = [&](std::vector<double> coef, double rhs) {
            coef.resize(dim, 0.0);
            a.push_back(coef);
            b.push_back(rhs);
        };
        row({1.0}, d[last]);
        row({-1.0}, 0.0);
        // Generator that balances: p = fixed + y0 - (two ? y1 : 0).
        const std::size_t gb = gbus.back();
        const double gcap = cap.back();
        row({1.0, two ? -1.0 : 0.0}, gcap - fixed);
        row({-1.0, two ? 1.0 : 0.0}, fixed);
        if (two) {
            row({0.0, 1.0}, cap[0]);
            row({0.0, -1.0}, 0.0);
        }
        for (std::size_t l = 0; l < lines.size(); ++l) {
            // flow = c + cy0*y0 + cy1*y1
            double c = 0;
            for (std::size_t i = 0; i + 1 < k; ++i) c -= ptdf[l][lbus[i]] * s[i];
            c += ptdf[l][gb] * fixed;
            double cy0 = ptdf[l][gb] - ptdf[l][lbus[last]];
            double cy1 = two ? ptdf[l][gbus[0]] - ptdf[l][gb] : 0.0;
            const double lim = net.branches[lines[l]].rating_lte;
            row({cy0, cy1}, lim - c);
            row({-cy0, -cy1}, lim + c);
        }
        if (auto y0 = max_first(a, b)) best_served = std::max(best_served, fixed + *y0);

        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] > steps[pos]) idx[pos++] = 0;
        if (pos == idx.size()) break;
    }
    return total - best_served;
}

/// Random connected system for the shed oracle: 3 to 6 buses, one or two
/// generator buses, one to three load buses (2 to 10 MW), tight line ratings.
struct ShedSystem {
    Network net;
    std::vector<BusDemand> demand;
};

inline ShedSystem random_shed_system(RandomSource& rng) {
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * rng.draw(); };
    auto pick = [&](int lo, int hi) { return lo + std::min(hi - lo, static_cast<int>(rng.draw() * (hi - lo + 1))); };
    ShedSystem sys;
    auto& net = sys.net;
    net.name = "shed";
    net.base_mva = 100;
    const int n = pick(3, 6);
    for (int i = 1; i <= n; ++i) {
        Bus b;
        b.id = i;
        b.area = 1;
        b.base_kv = 138;
        net.buses.push_back(b);
    }
    net.reindex();
    int ckt = 0;
    auto add_line = [&](int f, int t) {
        Branch br;
        br.from_bus = f;
        br.to_bus = t;
        br.circuit_id = std::to_string(++ckt);
        br.reactance = uni(0.05, 0.3);
        br.rating_lte = uni(2.0, 15.0);
        br.rating_ste = 1.2 * br.rating_lte;
        net.branches.push_back(br);
    };
    for (int k = 2; k <= n; ++k) add_line(pick(1, k - 1), k);
    for (int e = pick(0, 2); e > 0; --e) {
        int a = pick(1, n), b = pick(1, n - 1);
        if (b >= a) ++b;
        add_line(std::min(a, b), std::max(a, b));
    }
    // Distinct buses for generators and loads.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 1);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(pick(0, static_cast<int>(i) - 1))]);
    const int ng = pick(1, 2);
    const int nl = std::min(pick(1, 3), n - ng);
    for (int g = 0; g < ng; ++g) {
        Generator gen;
        gen.bus = order[static_cast<std::size_t>(g)];
        gen.p_max = uni(3.0, 25.0);
        gen.q_min = -100;
        gen.q_max = 100;
        gen.machine_ref = "U400";
        net.generators.push_back(gen);
    }
    for (int l = 0; l < nl; ++l) {
        Load ld;
        ld.bus = order[static_cast<std::size_t>(ng + l)];
        ld.p_nominal = uni(2.0, 10.0);
        net.loads.push_back(ld);
    }
    for (const auto& b : net.buses)
        for (const auto& ld : net.loads)
            if (ld.bus == b.id) sys.demand.push_back({ld.bus, ld.p_nominal, 0.0});
    net.buses[net.bus_index(net.generators[0].bus)].kind = BusKind::slack;
    return sys;
}

// ---- dynamics --------------------------------------------------------------

/// Inertia-weighted mean angle per island, online machines only; deviations
/// per machine (0 for offline machines).
inline std::vector<double> coi_deviation(const DynamicModel& model, const DynamicState& st) {
    std::vector<double> num(model.net.buses.size(), 0.0), den(model.net.buses.size(), 0.0);
    for (std::size_t m = 0; m < model.machines.size(); ++m) {
        const auto& mc = model.machines[m];
        if (!mc.online) continue;
        const auto is = model.island_of_bus[mc.bus];
        const double w = mc.p.h * mc.scale;
        num[is] += w * st.machines[m].delta;
        den[is] += w;
    }
    std::vector<double> dev(model.machines.size(), 0.0);
    for (std::size_t m = 0; m < model.machines.size(); ++m) {
        const auto& mc = model.machines[m];
        if (!mc.online) continue;
        const auto is = model.island_of_bus[mc.bus];
        dev[m] = st.machines[m].delta - num[is] / den[is];
    }
    return dev;
}

/// Small-signal natural frequency (Hz) of two classical machines joined by a
/// pure reactance x_total (system pu) at rotor angle difference delta12.
inline double two_machine_frequency(double e1, double e2, double x_total, double delta12, double h1_sys,
                                    double h2_sys, double hz = 60.0) {
    const double k = e1 * e2 * std::cos(delta12) / x_total;
    const double ws = 2 * std::numbers::pi * hz;
    const double wn = std::sqrt(ws * k * (1.0 / (2 * h1_sys) + 1.0 / (2 * h2_sys)));
    return wn / (2 * std::numbers::pi);
}

// ---- metrics ---------------------------------------------------------------

/// 400 h trapezoid: 100 until hour 51, linear to 90 at hour 76, flat to hour
/// 100, then +0.2 %/h back to 100 at hour 150.
inline std::vector<double> trapezoid_trace() {
    std::vector<double> v(400, 100.0);
    for (int h = 51; h <= 76; ++h) v[static_cast<std::size_t>(h)] = 100.0 - 0.4 * (h - 51);
    for (int h = 77; h <= 100; ++h) v[static_cast<std::size_t>(h)] = 90.0;
    for (int h = 101; h <= 150; ++h) v[static_cast<std::size_t>(h)] = 90.0 + 0.2 * (h - 100);
    return v;
}

/// Trapezoid-rule mean of values / 100, written out independently.
inline double lambda(const std::vector<double>& v) {
    if (v.size() < 2) return v.empty() ? 0.0 : v[0] / 100.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s / static_cast<double>(v.size() - 1) / 100.0;
}

}  // namespace oracle
