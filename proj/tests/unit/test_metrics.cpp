#include <gtest/gtest.h>

#include <cmath>

#include "../oracles.hpp"
#include "gridres/metrics.hpp"
#include "support.hpp"

using namespace gridres;

namespace {

std::vector<Indicators> flat_indicators(std::size_t n) { return std::vector<Indicators>(n); }

}  // namespace

TEST(Metrics, TrapezoidFormulas) {
    auto v = oracle::trapezoid_trace();
    auto ps = detect_phases(v, {51, 25});
    ASSERT_TRUE(ps.t0 && ps.t_ee && ps.t_sr && ps.t_r);
    EXPECT_EQ(*ps.t0, 51);
    EXPECT_EQ(*ps.t_ee, 76);
    EXPECT_EQ(*ps.t_sr, 100);
    EXPECT_EQ(*ps.t_r, 150);
    auto m = compute_metrics(v, ps);
    EXPECT_DOUBLE_EQ(*m.intact_period, 51.0);
    EXPECT_NEAR(*m.disruption_rate, -0.4, 1e-12);
    EXPECT_DOUBLE_EQ(*m.preparation_time, 24.0);
    EXPECT_NEAR(*m.recovery_rate, 0.2, 1e-12);
    EXPECT_DOUBLE_EQ(*m.recovery_time, 50.0);
    EXPECT_DOUBLE_EQ(*m.absorption_time, 49.0);
    EXPECT_NEAR(*m.area_under_curve, oracle::lambda(v), 1e-12);
    EXPECT_FALSE(m.instantaneous_drop);
}

TEST(Metrics, FlatTraceIsIntact) {
    std::vector<double> v(400, 100.0);
    auto ps = detect_phases(v, {51, 25});
    EXPECT_FALSE(ps.t0.has_value());
    auto m = compute_metrics(v, ps);
    EXPECT_DOUBLE_EQ(*m.area_under_curve, 1.0);
    EXPECT_DOUBLE_EQ(*m.intact_period, 400.0);
    EXPECT_FALSE(m.recovery_time.has_value());
}

TEST(Metrics, InstantaneousDrop) {
    std::vector<double> v(200, 100.0);
    for (int h = 60; h < 120; ++h) v[static_cast<std::size_t>(h)] = 70.0;
    auto ps = detect_phases(v, {60, 1});
    ASSERT_TRUE(ps.t0 && ps.t_ee);
    auto m = compute_metrics(v, ps);
    if (*ps.t0 == *ps.t_ee) {
        EXPECT_TRUE(m.instantaneous_drop);
        EXPECT_TRUE(std::isinf(*m.disruption_rate));
    } else {
        EXPECT_LT(*m.disruption_rate, 0.0);
    }
}

TEST(Metrics, AreaMatchesOracle) {
    RandomSource rng(1);
    for (int i = 0; i < 1000; ++i) {
        auto v = gt::random_trace(rng, gt::pick(rng, 1, 500));
        ASSERT_NEAR(area_under_curve(v), oracle::lambda(v), 1e-12);
    }
}

TEST(Metrics, AreaPointwiseDominance) {
    RandomSource rng(2);
    for (int i = 0; i < 1000; ++i) {
        const int n = gt::pick(rng, 2, 400);
        auto hi = gt::random_trace(rng, n);
        auto lo = hi;
        for (auto& x : lo) x -= gt::uniform(rng, 0, x) * (rng.draw() < 0.3 ? 1.0 : 0.0);
        const double a_hi = area_under_curve(hi), a_lo = area_under_curve(lo);
        ASSERT_LE(a_lo, a_hi + 1e-15) << i;
        ASSERT_LE(a_hi, 1.0 + 1e-15);
        ASSERT_GE(a_lo, 0.0);
    }
}

TEST(Metrics, PhaseOrderingOnRandomTraces) {
    RandomSource rng(3);
    for (int i = 0; i < 1000; ++i) {
        auto v = gt::random_trace(rng, 400);
        auto ps = detect_phases(v, {51, 25});
        if (ps.t0 && ps.t_ee) ASSERT_LE(*ps.t0, *ps.t_ee);
        if (ps.t_ee && ps.t_sr) ASSERT_LE(*ps.t_ee, *ps.t_sr);
        if (ps.t_sr && ps.t_r) ASSERT_LE(*ps.t_sr, *ps.t_r);
        auto m = compute_metrics(v, ps);
        if (m.recovery_time) ASSERT_GE(*m.recovery_time, 0.0);
    }
}

TEST(Traces, AggregatedNeverAboveSteady) {
    RandomSource rng(4);
    const std::size_t n = 100;
    auto steady = flat_indicators(n);
    std::vector<std::optional<Indicators>> agg(n);
    for (std::size_t h = 0; h < n; ++h) {
        steady[h].load_served = gt::uniform(rng, 50, 100);
        steady[h].lines_available = gt::uniform(rng, 80, 100);
        steady[h].lines_in_service = steady[h].lines_available - gt::uniform(rng, 0, 5);
        if (rng.draw() < 0.2) {
            Indicators a = steady[h];
            a.load_served = gt::uniform(rng, 0, 110);  // may exceed steady; must be clamped
            agg[h] = a;
        }
    }
    auto set = build_traces(steady, agg);
    for (auto c : kCategories) {
        const auto& s = set.get(c, Mode::steady).values;
        const auto& a = set.get(c, Mode::aggregated).values;
        ASSERT_EQ(s.size(), n);
        for (std::size_t h = 0; h < n; ++h) ASSERT_LE(a[h], s[h]);
    }
    const auto& in = set.get(Category::lines_in_service, Mode::steady).values;
    const auto& av = set.get(Category::lines_available, Mode::steady).values;
    for (std::size_t h = 0; h < n; ++h) EXPECT_LE(in[h], av[h]);
}

TEST(Traces, CsvRoundTrip) {
    RandomSource rng(5);
    auto steady = flat_indicators(50);
    std::vector<std::optional<Indicators>> agg(50);
    for (auto& s : steady) s.generator_capacity = gt::uniform(rng, 0, 100);
    auto set = build_traces(steady, agg);
    auto again = parse_trace_csv(trace_csv(set));
    for (auto c : kCategories)
        for (auto m : kModes) EXPECT_EQ(again.get(c, m).values, set.get(c, m).values);
    auto single = parse_trace_csv("hour,value\n0,100\n1,90\n2,95\n");
    EXPECT_EQ(single.traces.size(), 1u);
    EXPECT_THROW(parse_trace_csv("hour,value\n0,100\n2,90\n"), InputError);
}

TEST(Compare, DipsAndDeltas) {
    const std::size_t n = 200;
    auto steady = flat_indicators(n);
    std::vector<std::optional<Indicators>> agg(n);
    Indicators dip;
    dip.load_served = 60;
    agg[80] = dip;
    auto set = build_traces(steady, agg);
    auto rep = compare(set, {51, 25});
    for (const auto& c : rep.categories) {
        if (c.category != Category::load_served) {
            EXPECT_TRUE(c.dips.empty());
            continue;
        }
        ASSERT_EQ(c.dips.size(), 1u);
        EXPECT_EQ(c.dips[0].first, 80);
        EXPECT_DOUBLE_EQ(c.dips[0].second, 40.0);
        ASSERT_TRUE(c.dominant_dip_hour.has_value());
        EXPECT_EQ(*c.dominant_dip_hour, 80);
        ASSERT_TRUE(c.delta[5].has_value());
        EXPECT_NEAR(*c.delta[5], -40.0 / 100.0 / (n - 1), 1e-12);
    }
}
