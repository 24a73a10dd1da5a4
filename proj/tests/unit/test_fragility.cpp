#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gridres/case_io.hpp"
#include "gridres/fragility.hpp"
#include "support.hpp"

using namespace gridres;

TEST(Fragility, BoundariesExact) {
    for (auto cls : {Robustness::normal, Robustness::more_robust}) {
        auto c = default_curve(cls);
        EXPECT_EQ(failure_probability(c, c.v_cr - 1e-9), 0.0);
        EXPECT_EQ(failure_probability(c, 0.0), 0.0);
        EXPECT_EQ(failure_probability(c, c.v_br + 1e-9), 1.0);
        EXPECT_EQ(failure_probability(c, 500.0), 1.0);
        EXPECT_EQ(failure_probability(c, c.v_br), 1.0);
    }
    EXPECT_EQ(default_curve(Robustness::normal).v_cr, 30.0);
    EXPECT_EQ(default_curve(Robustness::more_robust).v_br, 70.0);
}

TEST(Fragility, MonotoneOnRandomCurves) {
    RandomSource rng(31);
    for (int i = 0; i < 1000; ++i) {
        auto c = gt::random_curve(rng);
        double prev = -1.0;
        for (double v = c.v_cr - 5; v <= c.v_br + 5; v += 0.05) {
            double p = failure_probability(c, v);
            ASSERT_GE(p, 0.0);
            ASSERT_LE(p, 1.0);
            ASSERT_GE(p, prev - 1e-15) << "curve " << i << " at " << v;
            prev = p;
        }
        ASSERT_EQ(failure_probability(c, c.v_cr - 1e-6), 0.0);
        ASSERT_EQ(failure_probability(c, c.v_br + 1e-6), 1.0);
    }
}

TEST(Fragility, RejectsBadCurves) {
    EXPECT_THROW(FragilityCurve::from_points({{30, 0}, {30, 0.5}, {40, 1}}, Robustness::normal), InputError);
    EXPECT_THROW(FragilityCurve::from_points({{30, 0}, {35, 0.6}, {38, 0.5}, {40, 1}}, Robustness::normal),
                 InputError);
    EXPECT_THROW(FragilityCurve::from_points({{30, 0}, {40, 0.9}}, Robustness::normal), InputError);
}

TEST(Fragility, MonteCarloWithinThreeSigma) {
    const std::size_t n = 100000;
    for (double p : {0.01, 0.15, 0.5, 0.9}) {
        double rate = empirical_failure_rate(p, n, 17);
        double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
        EXPECT_LE(std::abs(rate - p), 3 * sigma) << p;
        EXPECT_EQ(rate, empirical_failure_rate(p, n, 17, Execution::serial));
    }
}

TEST(Fragility, RandomSourceIsOpenInterval) {
    RandomSource rng(0);
    for (int i = 0; i < 100000; ++i) {
        double u = rng.draw();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    RandomSource a(42), b(42);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.draw(), b.draw());
}

TEST(Repair, ScheduleRules) {
    RepairParams det;
    det.deterministic = true;
    det.repair_blocked_during_event = false;
    RandomSource rng(1);
    EXPECT_EQ(schedule_repair(60, FailureMode::line, det, 76, rng), 70);
    EXPECT_EQ(schedule_repair(60, FailureMode::tower, det, 76, rng), 110);
    det.repair_blocked_during_event = true;
    EXPECT_EQ(schedule_repair(60, FailureMode::line, det, 76, rng), 76);
    auto p = RepairParams::from_tower_mttr(60);
    EXPECT_DOUBLE_EQ(p.mttr_line, 12.0);
    RepairParams stoch;
    for (int i = 0; i < 1000; ++i) ASSERT_GT(schedule_repair(51, FailureMode::line, stoch, 76, rng), 51);
}

TEST(Repair, ExponentialMean) {
    RandomSource rng(3);
    RepairParams p;
    double s = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) s += sample_repair_duration(FailureMode::tower, p, rng);
    // Standard error of the mean is 50 / sqrt(n).
    EXPECT_NEAR(s / n, 50.0, 4 * 50.0 / std::sqrt(double(n)));
}

TEST(Timeline, ExposureAndOrdering) {
    auto net = load_case("rts96");
    auto wind = WindProfile::storm(400, {51, 25});
    RepairParams params;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RandomSource rng(seed);
        auto tl = build_outage_timeline(net, wind, FragilitySet::defaults(), params, {51, 25}, rng);
        for (std::size_t k = 0; k < tl.records.size(); ++k) {
            const auto& r = tl.records[k];
            const auto& br = net.branches[r.branch];
            EXPECT_FALSE(br.is_transformer);
            EXPECT_TRUE(wind_exposed(net, br, 1));
            EXPECT_GE(r.failure_hour, 51);
            EXPECT_LT(r.failure_hour, 76);
            EXPECT_GE(r.restore_hour, 76);  // repair blocked during the event
            if (k > 0) {
                const auto& q = tl.records[k - 1];
                EXPECT_TRUE(q.failure_hour < r.failure_hour ||
                            (q.failure_hour == r.failure_hour && q.branch < r.branch));
            }
            // A branch fails at most once while still damaged.
            for (std::size_t j = 0; j < k; ++j)
                if (tl.records[j].branch == r.branch) EXPECT_GE(r.failure_hour, tl.records[j].restore_hour);
        }
    }
}

TEST(Timeline, CalmWindNoFailures) {
    auto net = load_case("rts96");
    RandomSource rng(5);
    auto tl = build_outage_timeline(net, WindProfile::calm(400), FragilitySet::defaults(), {}, {51, 25}, rng);
    EXPECT_TRUE(tl.records.empty());
}

TEST(Timeline, SerialParallelIdentical) {
    auto net = load_case("rts96");
    auto wind = WindProfile::storm(400, {51, 25});
    auto a = mean_failures_per_hour(net, wind, FragilitySet::defaults(), {}, {51, 25}, 64, 9, Execution::serial);
    auto b = mean_failures_per_hour(net, wind, FragilitySet::defaults(), {}, {51, 25}, 64, 9, Execution::parallel);
    EXPECT_EQ(a, b);
}

TEST(Seeds, ReplicaSeedsDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(replica_seed(7, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(replica_seed(7, 3), replica_seed(7, 3));
    EXPECT_NE(replica_seed(7, 3), replica_seed(8, 3));
}
