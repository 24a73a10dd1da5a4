#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridres/network.hpp"
#include "gridres/rng.hpp"

namespace gridres {

enum class Robustness { normal, more_robust };

const char* to_string(Robustness r);

/// Failure probability of a transmission corridor against wind speed.
/// Zero below the critical speed v_cr, one above the breakdown speed v_br,
/// piecewise-linear through `points` in between.
struct FragilityCurve {
    double v_cr = 0.0;
    double v_br = 0.0;
    std::vector<std::pair<double, double>> points;  // (wind m/s, probability)
    Robustness robustness_class = Robustness::normal;

    /// Builds a curve from samples; v_cr and v_br are the first and last wind
    /// speeds. Throws InputError unless speeds strictly increase, probabilities
    /// are non-decreasing within [0, 1] and the last probability is 1.
    static FragilityCurve from_points(std::vector<std::pair<double, double>> points,
                                      Robustness cls);
};

double failure_probability(const FragilityCurve& curve, double wind_mps);

/// Stand-in curves (the published curves are only available as a figure):
/// normal v_cr=30, v_br=60 m/s; more-robust v_cr=40, v_br=70 m/s.
FragilityCurve default_curve(Robustness cls);

/// CSV `wind_mps,probability`.
FragilityCurve parse_fragility_csv(std::string_view text, Robustness cls);
std::string write_fragility_csv(const FragilityCurve& curve);

struct FragilitySet {
    std::optional<FragilityCurve> normal;
    std::optional<FragilityCurve> more_robust;

    static FragilitySet defaults();
    /// Throws InputError when the class has no curve.
    const FragilityCurve& get(Robustness cls) const;
};

struct EventWindow {
    int start = 51;
    int duration = 25;
    int end() const { return start + duration; }
    bool contains(int hour) const { return hour >= start && hour < end(); }
};

struct WindProfile {
    std::vector<double> hourly_speed;  // m/s
    int affected_area = 1;

    /// Stand-in storm shape: zero outside the window, a half-sine inside it.
    static WindProfile storm(std::size_t horizon, EventWindow window, double base_mps = 22.0,
                             double peak_mps = 48.0, int area = 1);
    static WindProfile calm(std::size_t horizon, int area = 1);
};

/// CSV `hour,speed_mps`; the affected area is supplied separately.
WindProfile parse_wind_csv(std::string_view text, int affected_area);
std::string write_wind_csv(const WindProfile& wind);

enum class FailureMode { line, tower };
enum class SampleOutcome { survives, fails };

const char* to_string(FailureMode m);

struct RepairParams {
    double mttr_line = 10.0;   // hours
    double mttr_tower = 50.0;  // hours
    bool repair_blocked_during_event = true;
    bool deterministic = false;   // duration = MTTR exactly
    double tower_fraction = 0.5;  // probability a failure is a tower failure

    /// Line MTTR is one fifth of the tower MTTR.
    static RepairParams from_tower_mttr(double mttr_tower);
    double mttr(FailureMode mode) const {
        return mode == FailureMode::tower ? mttr_tower : mttr_line;
    }
};

/// Fails iff prob > one uniform draw.
SampleOutcome sample_status(double prob, RandomSource& rng);

/// Exponential with mean MTTR(mode), or exactly MTTR when deterministic.
double sample_repair_duration(FailureMode mode, const RepairParams& params, RandomSource& rng);

/// restore = failure_hour + ceil(duration), clamped to event_end when repair is
/// blocked during the event. Always > failure_hour.
int schedule_repair(int failure_hour, FailureMode mode, const RepairParams& params,
                    int event_end, RandomSource& rng);

struct OutageRecord {
    std::size_t branch = 0;
    int failure_hour = 0;
    int restore_hour = 0;  // first hour back in service
    FailureMode mode = FailureMode::line;
};

struct OutageTimeline {
    std::vector<OutageRecord> records;  // ordered by (failure_hour, branch)

    bool damaged(std::size_t branch, int hour) const;
    /// CSV `branch,from,to,ckt,failure_hour,restore_hour,mode`.
    std::string to_csv(const Network& net) const;
};

/// Wind exposure: non-transformer branches with both ends in `area`.
/// Transformers are substation equipment and carry no wind fragility.
bool wind_exposed(const Network& net, const Branch& br, int area);

/// 138 kV corridors are normal, 230 kV and above more robust.
Robustness classify_branch(const Network& net, const Branch& br);

/// Hourly sampling over the event window. For each hour, every exposed branch
/// that is still intact (in network order) takes one status draw; a failure
/// then takes one draw for the failure mode and, unless repair is
/// deterministic, one for the repair duration.
OutageTimeline build_outage_timeline(const Network& net, const WindProfile& wind,
                                     const FragilitySet& curves, const RepairParams& params,
                                     EventWindow window, RandomSource& rng);

enum class Execution { serial, parallel };

/// Monte Carlo mean number of new failures per event hour over `runs`
/// independent timelines (seed i = replica_seed(master_seed, i)). The parallel
/// path uses OpenMP and returns exactly the serial result.
std::vector<double> mean_failures_per_hour(const Network& net, const WindProfile& wind,
                                           const FragilitySet& curves,
                                           const RepairParams& params, EventWindow window,
                                           std::size_t runs, std::uint64_t master_seed,
                                           Execution exec = Execution::parallel);

/// Fraction of `n` sample_status draws that fail; OpenMP over fixed-size
/// chunks with per-chunk seeds, identical across thread counts.
double empirical_failure_rate(double prob, std::size_t n, std::uint64_t seed,
                              Execution exec = Execution::parallel);

}  // namespace gridres
