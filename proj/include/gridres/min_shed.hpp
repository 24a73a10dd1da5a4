#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gridres/network.hpp"
#include "gridres/power_flow.hpp"
#include "gridres/topology.hpp"

namespace gridres {

enum class RatingSet { lte, ste };

struct ShedOptions {
    RatingSet ratings = RatingSet::lte;
    /// Run the AC check and escalation. Off gives the bare DC optimum.
    bool ac_verify = true;
    int max_escalations = 25;
    /// On AC non-convergence, load buses whose voltage in the best Newton
    /// iterate is at or below max(weak_voltage, lowest + 0.05) get their shed
    /// floor raised by weak_bus_step of their demand. With no such bus left
    /// the island-wide floor rises by nonconvergence_step of island demand.
    double weak_voltage = 0.9;
    double weak_bus_step = 0.1;
    double nonconvergence_step = 0.05;
    /// A converged solution with a load bus below this voltage is not accepted
    /// (undervoltage relays would act on it); those buses take the weak-bus
    /// step for as long as that raises the lowest such voltage. If it stops
    /// helping, the plan from before the first voltage step is kept and the
    /// sag is only reported. Zero disables the check.
    double min_load_voltage = 0.9;
    /// Flow limit tightening margin applied to overloaded branches.
    double tighten_margin = 0.98;
    /// Voltage band used only for reporting.
    double v_min = 0.95, v_max = 1.05;
    PowerFlowOptions power_flow;
};

struct IslandShed {
    std::size_t island = 0;
    bool dead = false;
    bool feasible = true;
    double demand_mw = 0.0;
    double dc_shed_mw = 0.0;  // first DC optimum, before any escalation
    double shed_mw = 0.0;     // final
    int escalations = 0;
    bool used_lp = false;     // false when proportional dispatch was already DC-feasible
    std::size_t voltage_violations = 0;
};

struct ShedPlan {
    std::vector<double> shed_fraction;  // per bus, of the demand passed in
    std::vector<double> dispatch_mw;    // per generator (0 when offline)
    std::vector<BusDemand> served;      // per load bus, after shedding
    std::vector<IslandShed> islands;    // one per island, island order
    double demand_mw = 0.0;
    double dc_shed_mw = 0.0;
    double shed_mw = 0.0;
    bool feasible = true;
    PowerFlowSolution solution;  // AC solution at the final plan (empty if !ac_verify)
};

/// Minimum active-power shed per energized island: DC flow limits, generator
/// MW limits and island balance as an LP, then an AC check that raises shed
/// until the AC solution converges without rating violations. Dead islands
/// shed everything. `demand` is the load requested this hour.
ShedPlan solve_minimum_shed(const Network& net, const IslandSet& islands,
                            const std::vector<BusDemand>& demand, const ShedOptions& opts = {});

}  // namespace gridres
