#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridres/dynamics.hpp"
#include "gridres/fragility.hpp"
#include "gridres/machine.hpp"
#include "gridres/metrics.hpp"
#include "gridres/network.hpp"
#include "gridres/protection.hpp"
#include "gridres/steady_state.hpp"

namespace gridres {

enum class RunMode { steady_only, aggregated };

struct ScenarioConfig {
    std::string case_path = "rts96";
    std::string wind_path;               // empty: built-in storm over the event window
    std::string fragility_normal_path;   // empty: built-in stand-in curves
    std::string fragility_robust_path;
    std::string load_profile_path;       // empty: RTS-96 winter shape
    std::string machine_path;            // empty: built-in stand-ins
    std::string relay_path;              // empty: default placements and settings
    std::uint64_t seed = 1;
    int horizon = 400;
    EventWindow window{51, 25};
    int affected_area = 1;
    RunMode mode = RunMode::aggregated;
    bool corrective = false;
    int replicas = 1;
    std::string output_dir = "gridres_out";
    RepairParams repair;
    bool trip_ste_overloads = true;  // branches above STE after a transient are opened
    bool plots = true;
    bool series = true;  // per-hour dynamics time series
    int series_decimation = 4;
    PhaseOptions phases;

    void check() const;
};

/// Everything a replica reads; loaded once and shared read-only.
struct ScenarioInputs {
    Network net;
    WindProfile wind;
    FragilitySet curves;
    LoadProfile profile;
    MachineLibrary machines;
    RelaySettings relays;
};

ScenarioInputs load_inputs(const ScenarioConfig& cfg);

/// The hour's scheduled network with a transient's outcome applied: relay and
/// out-of-step trips, machines that lost synchronism (unstable verdict only),
/// branches above STE at the end (when enabled) and relay load sheds.
struct AppliedTransient {
    Network net;
    std::vector<std::size_t> thermal_trips;  // branches opened for STE overload
    bool changed = false;
};

AppliedTransient apply_transient(const Network& scheduled, const TransientResult& tr,
                                 bool trip_ste_overloads);

/// One switching hour studied in isolation: the pre-disturbance steady state,
/// the transient, and the hour's steady and aggregated re-solves.
struct DisturbanceStudy {
    SteadyStateRecord pre;
    TransientResult transient;
    SteadyStateRecord steady;      // scheduled topology, no transient effects
    SteadyStateRecord aggregated;  // with the transient's trips and sheds
};

/// Throws InputError when the pre-disturbance state cannot seed the dynamics.
DisturbanceStudy study_disturbance(const Network& net, const LoadProfile& profile, std::size_t hour,
                                   const std::vector<Disturbance>& disturbances,
                                   const MachineLibrary& machines, const RelaySettings& relays,
                                   const SimConfig& sim, bool trip_ste_overloads = true);

struct HourTransient {
    int hour = 0;
    std::vector<Disturbance> disturbances;
    bool ran = false;
    std::string note;  // why it did not run, or a dynamics diagnostic
    TransientResult result;
    std::optional<Indicators> aggregated;  // set when the transient changed the hour's state
};

struct LogEvent {
    int hour = 0;
    double t = 0.0;  // seconds into the hour's transient (0 for hourly events)
    std::string device;
    std::string target;
    std::string detail;
};

struct ReplicaReport {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::string error;  // non-empty: the replica aborted
    OutageTimeline timeline;
    std::vector<Indicators> steady;
    std::vector<std::optional<Indicators>> aggregated;
    std::vector<double> shed_mw;  // steady shed per hour
    std::vector<HourTransient> transients;
    std::vector<LogEvent> events;
    TraceSet traces;
    ComparisonReport comparison;
    double wall_seconds = 0.0;  // excluded from determinism
};

struct RunReport {
    ScenarioConfig config;
    std::vector<ReplicaReport> replicas;
    double wall_seconds = 0.0;
};

ReplicaReport run_replica(const ScenarioConfig& cfg, const ScenarioInputs& in, std::size_t index);

/// Replicas run in parallel (OpenMP) or one after another; results are
/// identical either way.
RunReport run_scenario(const ScenarioConfig& cfg, const ScenarioInputs& in,
                       Execution exec = Execution::parallel);

}  // namespace gridres
