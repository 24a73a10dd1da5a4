#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridres/csv.hpp"
#include "gridres/outputs.hpp"
#include "gridres/scenario.hpp"

using namespace gridres;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small_config(std::uint64_t seed = 3) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.horizon = 60;
    cfg.window = {10, 8};
    cfg.series = false;
    return cfg;
}

const ScenarioInputs& rts_inputs() {
    static const ScenarioInputs in = load_inputs(small_config());
    return in;
}

std::string fingerprint(const ReplicaReport& r, const Network& net) {
    return r.error + trace_csv(r.traces) + comparison_csv(r.comparison) + events_csv(r) + transients_csv(r, net) +
           r.timeline.to_csv(net);
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("gridres_test_" + name);
    fs::remove_all(p);
    return p;
}

std::size_t data_rows(const fs::path& file) {
    std::ifstream in(file);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++n;
    return n - 1;  // header
}

}  // namespace

TEST(Scenario, ConfigChecks) {
    auto cfg = small_config();
    cfg.window = {55, 10};
    EXPECT_THROW(cfg.check(), InputError);
    cfg = small_config();
    cfg.replicas = 0;
    EXPECT_THROW(cfg.check(), InputError);
}

TEST(Scenario, SameSeedSameBytes) {
    const auto& in = rts_inputs();
    auto cfg = small_config();
    auto a = run_replica(cfg, in, 0);
    auto b = run_replica(cfg, in, 0);
    ASSERT_TRUE(a.error.empty()) << a.error;
    EXPECT_EQ(fingerprint(a, in.net), fingerprint(b, in.net));
}

TEST(Scenario, SerialAndParallelAgree) {
    const auto& in = rts_inputs();
    auto cfg = small_config();
    cfg.replicas = 3;
    auto s = run_scenario(cfg, in, Execution::serial);
    auto p = run_scenario(cfg, in, Execution::parallel);
    ASSERT_EQ(s.replicas.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(s.replicas[i].seed, replica_seed(cfg.seed, i));
        EXPECT_EQ(fingerprint(s.replicas[i], in.net), fingerprint(p.replicas[i], in.net));
    }
}

TEST(Scenario, SteadyOnlyNeverRunsDynamics) {
    const auto& in = rts_inputs();
    auto cfg = small_config();
    cfg.mode = RunMode::steady_only;
    auto r = run_replica(cfg, in, 0);
    EXPECT_TRUE(r.transients.empty());
    for (const auto& a : r.aggregated) EXPECT_FALSE(a.has_value());
    for (auto c : kCategories)
        EXPECT_EQ(r.traces.get(c, Mode::steady).values, r.traces.get(c, Mode::aggregated).values);
}

TEST(Scenario, TransientsDoNotLeakIntoNextHour) {
    // Steady traces come from the scheduled topology alone, so they match
    // between modes; only within-hour aggregated values can differ.
    const auto& in = rts_inputs();
    auto cfg = small_config();
    auto agg = run_replica(cfg, in, 0);
    cfg.mode = RunMode::steady_only;
    auto st = run_replica(cfg, in, 0);
    for (auto c : kCategories)
        EXPECT_EQ(agg.traces.get(c, Mode::steady).values, st.traces.get(c, Mode::steady).values);
}

TEST(Scenario, CalmWindGivesFlatTraces) {
    auto cfg = small_config();
    auto in = rts_inputs();
    in.wind = WindProfile::calm(static_cast<std::size_t>(cfg.horizon));
    auto r = run_replica(cfg, in, 0);
    ASSERT_TRUE(r.error.empty());
    EXPECT_TRUE(r.timeline.records.empty());
    EXPECT_TRUE(r.transients.empty());
    for (const auto& c : r.comparison.categories) {
        EXPECT_DOUBLE_EQ(*c.steady.area_under_curve, 1.0);
        EXPECT_DOUBLE_EQ(*c.aggregated.area_under_curve, 1.0);
    }
}

TEST(Scenario, PolygonShapeInvariants) {
    const auto& in = rts_inputs();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto cfg = small_config(seed);
        auto r = run_replica(cfg, in, 0);
        ASSERT_TRUE(r.error.empty()) << r.error;
        for (auto m : kModes) {
            const auto& in_s = r.traces.get(Category::lines_in_service, m).values;
            const auto& av = r.traces.get(Category::lines_available, m).values;
            for (std::size_t h = 0; h < in_s.size(); ++h) EXPECT_LE(in_s[h], av[h] + 1e-12);
        }
        for (const auto& c : r.comparison.categories)
            if (!c.dips.empty()) EXPECT_LE(*c.aggregated.area_under_curve, *c.steady.area_under_curve);
    }
}

TEST(Outputs, FileSetAndRowCounts) {
    const auto& in = rts_inputs();
    auto cfg = small_config();
    auto report = run_scenario(cfg, in);
    auto dir = scratch("single");
    emit_outputs(report, in.net, dir.string());
    for (const char* f : {"trace.csv", "metrics.csv", "comparison.csv", "events.csv", "timeline.csv",
                          "transients.csv", "summary.csv", "timing.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(data_rows(dir / "trace.csv"), static_cast<std::size_t>(cfg.horizon) * 5 * 2);
    EXPECT_TRUE(fs::exists(dir / "plots" / "load_served.svg"));
    fs::remove_all(dir);
}

TEST(Outputs, NoPlotsAndReplicaDirs) {
    const auto& in = rts_inputs();
    auto cfg = small_config();
    cfg.replicas = 2;
    auto report = run_scenario(cfg, in);
    auto dir = scratch("multi");
    emit_outputs(report, in.net, dir.string(), OutputOptions{false, false});
    EXPECT_TRUE(fs::exists(dir / "replica_000" / "trace.csv"));
    EXPECT_TRUE(fs::exists(dir / "replica_001" / "trace.csv"));
    EXPECT_FALSE(fs::exists(dir / "replica_000" / "plots"));
    EXPECT_EQ(data_rows(dir / "summary.csv"), 2u * 5 * 2);
    fs::remove_all(dir);
}

TEST(Outputs, EmptyReportRejected) {
    RunReport empty;
    try {
        emit_outputs(empty, rts_inputs().net, scratch("empty").string());
        FAIL();
    } catch (const InputError& e) {
        EXPECT_STREQ(e.what(), "no replicas");
    }
}

TEST(Outputs, UnwritableDirectoryNamesPath) {
    const auto& in = rts_inputs();
    auto cfg = small_config();
    cfg.mode = RunMode::steady_only;
    auto report = run_scenario(cfg, in);
    auto blocker = scratch("blocker");
    std::ofstream(blocker.string()) << "file";
    try {
        emit_outputs(report, in.net, (blocker / "sub").string());
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos) << e.what();
    }
    fs::remove_all(blocker);
}
