#pragma once

// Hand-rolled generators and small builders shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gridres/fragility.hpp"
#include "gridres/network.hpp"
#include "gridres/rng.hpp"

namespace gt {

using namespace gridres;

inline double uniform(RandomSource& rng, double lo, double hi) { return lo + (hi - lo) * rng.draw(); }

inline int pick(RandomSource& rng, int lo, int hi) {  // inclusive
    return lo + std::min(hi - lo, static_cast<int>(rng.draw() * (hi - lo + 1)));
}

inline Bus bus(int id, BusKind kind = BusKind::pq, int area = 1, double kv = 138.0, double v = 1.0) {
    Bus b;
    b.id = id;
    b.area = area;
    b.base_kv = kv;
    b.kind = kind;
    b.voltage_setpoint = v;
    return b;
}

inline Branch line(int f, int t, double r, double x, double b = 0.0, double rating = 500.0,
                   std::string ckt = "1") {
    Branch br;
    br.from_bus = f;
    br.to_bus = t;
    br.circuit_id = std::move(ckt);
    br.resistance = r;
    br.reactance = x;
    br.charging = b;
    br.rating_lte = rating;
    br.rating_ste = rating * 1.2;
    return br;
}

inline Generator gen(int bus, double pmax, double pset, std::string ref = "U400", double qlim = 999.0) {
    Generator g;
    g.bus = bus;
    g.p_max = pmax;
    g.p_set = pset;
    g.q_min = -qlim;
    g.q_max = qlim;
    g.machine_ref = std::move(ref);
    return g;
}

inline Load load(int bus, double p, double q = 0.0) {
    Load l;
    l.bus = bus;
    l.p_nominal = p;
    l.q_nominal = q;
    return l;
}

/// Random graph on buses 1..n: a random spanning tree plus `extra` chords.
/// Returns (from, to) pairs, no self loops; parallel pairs get distinct circuits.
inline std::vector<std::pair<int, int>> random_graph(RandomSource& rng, int n, int extra) {
    std::vector<std::pair<int, int>> e;
    for (int k = 2; k <= n; ++k) e.emplace_back(pick(rng, 1, k - 1), k);
    for (int k = 0; k < extra && n > 1; ++k) {
        int a = pick(rng, 1, n), b = pick(rng, 1, n - 1);
        if (b >= a) ++b;
        e.emplace_back(std::min(a, b), std::max(a, b));
    }
    return e;
}

/// Random curve: v_cr in [10, 40], v_br up to 40 m/s above it, a random
/// non-decreasing set of interior points.
inline FragilityCurve random_curve(RandomSource& rng) {
    double vcr = uniform(rng, 10, 40);
    double vbr = vcr + uniform(rng, 1, 40);
    int k = pick(rng, 0, 6);
    std::vector<double> xs, ps;
    for (int i = 0; i < k; ++i) {
        xs.push_back(uniform(rng, vcr, vbr));
        ps.push_back(rng.draw());
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ps.begin(), ps.end());
    std::vector<std::pair<double, double>> pts{{vcr, 0.0}};
    for (int i = 0; i < k; ++i)
        if (xs[i] > pts.back().first + 1e-6 && xs[i] < vbr - 1e-6) pts.emplace_back(xs[i], ps[i]);
    pts.emplace_back(vbr, 1.0);
    return FragilityCurve::from_points(pts, Robustness::normal);
}

/// Trace of `n` hourly values in [lo, 100], piecewise constant with random jumps.
inline std::vector<double> random_trace(RandomSource& rng, int n, double lo = 0.0) {
    std::vector<double> v(static_cast<std::size_t>(n), 100.0);
    double cur = 100.0;
    for (auto& x : v) {
        if (rng.draw() < 0.15) cur = uniform(rng, lo, 100.0);
        x = cur;
    }
    return v;
}

}  // namespace gt
