#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridres/network.hpp"
#include "gridres/topology.hpp"

namespace gridres {

using Complex = std::complex<double>;

/// Series/shunt pi-model admittances of one branch on system base.
struct BranchAdmittance {
    Complex yff, yft, ytf, ytt;
};

BranchAdmittance branch_admittance(const Branch& br);

/// Bus admittance matrix over all buses (network order). In-service branches
/// and fixed bus shunts only; loads and machines are not included.
Eigen::MatrixXcd build_ybus(const Network& net);

/// Slack for an island: the bus with the largest online p_max, lowest bus id
/// on ties. Returns the bus index.
std::size_t select_slack(const Network& net, const Island& island);

struct PowerFlowOptions {
    double tolerance = 1e-6;  // max |mismatch|, per-unit power
    int max_iterations = 20;
    /// Optional warm start (per-bus magnitude / angle). Ignored unless both
    /// have one entry per bus.
    std::vector<double> initial_vm;
    std::vector<double> initial_va;
};

struct BranchFlow {
    double p_from = 0.0, q_from = 0.0;  // MW / MVAr into the branch at the from end
    double p_to = 0.0, q_to = 0.0;

    double mva_from() const { return std::hypot(p_from, q_from); }
    double mva_to() const { return std::hypot(p_to, q_to); }
    double mva() const { return std::max(mva_from(), mva_to()); }
};

struct IslandSolve {
    std::size_t island = 0;
    std::size_t slack_bus = 0;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;
    double losses_mw = 0.0;
    std::string error;  // e.g. "singular Jacobian"
};

struct PowerFlowSolution {
    std::vector<double> vm;  // per-unit, 0 on dead buses
    std::vector<double> va;  // radians
    std::vector<BranchFlow> flows;
    std::vector<double> gen_p;  // MW per generator (0 when offline)
    std::vector<double> gen_q;  // MVAr
    double losses_mw = 0.0;     // branch losses plus shunt conductance consumption
    bool converged = false;
    int iterations = 0;         // max over islands
    double max_mismatch = 0.0;  // per-unit, max over islands
    std::vector<IslandSolve> islands;

    std::vector<Complex> voltages() const;
};

/// Newton-Raphson AC power flow, solved independently on each energized
/// island of `islands`. `demand` is per-bus (P, Q) in MW/MVAr, `dispatch_mw`
/// one entry per generator; the slack bus generators absorb the mismatch.
/// Non-convergence and singular Jacobians are reported per island, not thrown.
PowerFlowSolution run_power_flow(const Network& net, const IslandSet& islands,
                                 const std::vector<BusDemand>& demand,
                                 const std::vector<double>& dispatch_mw,
                                 const PowerFlowOptions& opts = {});

/// Convenience overload computing islands from the network as given.
PowerFlowSolution run_power_flow(const Network& net, const std::vector<BusDemand>& demand,
                                 const std::vector<double>& dispatch_mw,
                                 const PowerFlowOptions& opts = {});

}  // namespace gridres
