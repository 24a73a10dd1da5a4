#pragma once

#include <string>

#include "gridres/metrics.hpp"
#include "gridres/scenario.hpp"

namespace gridres {

/// Output root used when no directory is given: $GRIDRES_OUTPUT_ROOT, else
/// "gridres_out".
std::string default_output_root();

struct OutputOptions {
    bool plots = true;
    bool series = true;
};

/// Writes one directory per replica (the root itself for a single replica)
/// plus `summary.csv` and `timing.csv` at the root. Everything except
/// timing.csv is a pure function of the report. Throws InputError naming the
/// path on I/O failure, and "no replicas" on an empty report.
void emit_outputs(const RunReport& report, const Network& net, const std::string& dir,
                  const OutputOptions& opts = {});

/// Files of one replica, written into `dir`.
void emit_replica(const ReplicaReport& rep, const ScenarioConfig& cfg, const Network& net,
                  const std::string& dir, const OutputOptions& opts);

std::string events_csv(const ReplicaReport& rep);
std::string transients_csv(const ReplicaReport& rep, const Network& net);

/// Static SVG line plot of both modes of one category.
std::string trace_svg(const TraceSet& traces, Category c, EventWindow window);

}  // namespace gridres
