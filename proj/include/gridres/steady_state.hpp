#pragma once

#include <cstddef>

#include "gridres/min_shed.hpp"
#include "gridres/network.hpp"
#include "gridres/topology.hpp"

namespace gridres {

/// Hourly performance indicators, all in percent.
struct Indicators {
    double generator_units = 100.0;     // online units / all units
    double generator_capacity = 100.0;  // online p_max / total p_max
    double lines_in_service = 100.0;    // operational status, transmission lines only
    double lines_available = 100.0;     // infrastructure status
    double load_served = 100.0;         // served MW / scheduled MW
};

Indicators compute_indicators(const Network& state, double scheduled_mw, double served_mw);

struct SteadyStateRecord {
    std::size_t hour = 0;
    Network state;  // statuses after islanding for this hour
    IslandSet islands;
    ShedPlan plan;
    double scheduled_mw = 0.0;  // nominal x multiplier, before any shed
    double served_mw = 0.0;
    Indicators indicators;
};

/// Topology processing, minimum shed (with its AC check) and indicators for
/// one hour. `net` carries this hour's branch and generator statuses; load
/// served fractions below 1 model load already disconnected this hour.
SteadyStateRecord hourly_steady_state(const Network& net, const LoadProfile& profile,
                                      std::size_t hour, const ShedOptions& opts = {});

}  // namespace gridres
