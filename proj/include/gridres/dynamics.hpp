#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridres/machine.hpp"
#include "gridres/network.hpp"
#include "gridres/power_flow.hpp"
#include "gridres/protection.hpp"

namespace gridres {

struct SimConfig {
    double t_end = 15.0;
    double dt = 1.0 / 120.0;
    double disturbance_time = 1.0;
    double instability_deg = 180.0;  // from the island's centre of inertia
    double freq_filter_s = 0.05;     // 3 cycles
    double inner_tol = 1e-8;
    int inner_max = 10;
    bool protection = true;   // distance, UFLS and UVLS relays
    bool corrective = false;  // out-of-step generator tripping
    bool freeze_governors = false;
    bool limiters = true;
    bool record = false;
    int decimation = 4;

    void check() const;
};

struct MachineState {
    double delta = 0.0;  // rad, synchronous frame
    double dw = 0.0;     // pu speed deviation
    double eqp = 0.0;    // E'q
    double edp = 0.0;    // E'd
    double efd = 0.0;
    double pm = 0.0;     // pu on machine base
};

struct DynamicState {
    double t = 0.0;
    std::vector<MachineState> machines;
    std::vector<Complex> v;  // per bus, system pu
};

struct Machine {
    std::size_t gen = 0;  // generator index in the network
    std::size_t bus = 0;  // bus index
    MachineParams p;
    double scale = 1.0;  // machine base / system base
    double vref = 0.0, pref = 0.0;
    bool online = true;
    bool governor() const { return !p.classical && p.r > 0; }
};

/// Network plus machines in the form the integrator needs. Loads are
/// constant admittances; a machine is a Norton source behind ra + j x'd.
class DynamicModel {
public:
    Network net;
    std::vector<Machine> machines;
    std::vector<Complex> load_y;         // per bus, system pu, full pre-event load
    std::vector<double> load_remaining;  // per bus, fraction still connected
    std::vector<bool> energized;         // per bus: island holds an online machine
    std::vector<std::size_t> island_of_bus;

    /// Rebuilds the admittance matrix and factorization after any switching.
    void refactor();
    std::vector<Complex> solve_network(const std::vector<MachineState>& x) const;

    Complex emf(std::size_t m, const MachineState& s) const;
    /// Stator current on machine base.
    Complex current(std::size_t m, const MachineState& s, const std::vector<Complex>& v) const;
    double electrical_power(std::size_t m, const MachineState& s, const std::vector<Complex>& v) const;

private:
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    std::vector<Complex> y_source_;  // per machine, system pu
};

struct Initialized {
    DynamicModel model;
    DynamicState state;
};

/// Back-solves machine states from a converged power flow so every derivative
/// is zero at t = 0. `served` is the demand the solution was computed with.
/// Throws InputError for a non-converged solution or a machine outside its
/// field or gate limits.
Initialized init_from_power_flow(const Network& net, const PowerFlowSolution& sol,
                                 const std::vector<BusDemand>& served, const MachineLibrary& lib);

/// State derivatives at `state` (voltages taken from state.v).
std::vector<MachineState> derivatives(const DynamicModel& model, const DynamicState& state,
                                      const SimConfig& cfg);
double max_abs_derivative(const DynamicModel& model, const DynamicState& state,
                          const SimConfig& cfg);

class StepError : public std::runtime_error {
public:
    StepError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

/// One implicit-trapezoidal step, alternating with the network solve until
/// the state update is below cfg.inner_tol (at most cfg.inner_max passes).
/// `unconverged` is set when the pass limit was hit.
DynamicState step(const DynamicModel& model, const DynamicState& state, double dt,
                  const SimConfig& cfg, bool* unconverged = nullptr);

/// Online machines more than threshold_deg from the inertia-weighted mean
/// angle of the machines in their island. Returns machine indices.
std::vector<std::size_t> detect_loss_of_synchronism(const DynamicModel& model,
                                                    const DynamicState& state,
                                                    double threshold_deg);

struct Disturbance {
    enum class Kind { open_branch, close_branch, trip_generator };
    Kind kind = Kind::open_branch;
    std::size_t index = 0;  // branch or generator index
};

enum class Verdict { stable, unstable };
const char* to_string(Verdict v);

struct TransientEvent {
    double t = 0.0;
    std::string device;  // disturbance, distance, ufls, uvls, out_of_step
    std::string target;  // e.g. "branch 107-203 ckt 1", "bus 101", "gen 12 @ 122"
    std::string detail;
};

struct LoadShedEvent {
    double t = 0.0;
    std::size_t bus = 0;  // bus index
    std::string relay;    // ufls / uvls
    std::size_t stage = 0;
    double fraction = 0.0;   // configured stage fraction
    double remaining = 1.0;  // load fraction left after this event
};

struct SeriesRow {
    double t;
    const char* quantity;  // angle_deg, speed_hz, freq_hz, vm_pu
    int id;                // generator index for machine quantities, bus id for bus quantities
    double value;
};

struct TransientResult {
    Verdict verdict = Verdict::stable;
    std::vector<std::size_t> lost_synchronism;  // generator indices
    std::vector<TransientEvent> events;
    std::vector<LoadShedEvent> sheds;
    std::vector<std::size_t> tripped_branches;    // by distance relays
    std::vector<std::size_t> tripped_generators;  // by out-of-step action
    std::vector<double> load_remaining;           // per bus at the end
    std::vector<std::size_t> ste_overloads;       // in-service branches above STE at the end
    bool diverged = false;
    std::string diagnostic;
    int unconverged_steps = 0;
    double max_coi_deviation_deg = 0.0;
    double min_frequency_hz = kSystemHz;
    std::vector<SeriesRow> series;
    DynamicState final_state;
};

/// Runs one disturbance simulation from a converged pre-disturbance solution.
/// The disturbance list is applied at cfg.disturbance_time; relays are
/// evaluated after every accepted step in fixed device order.
TransientResult run_transient(const Network& net, const PowerFlowSolution& pre,
                              const std::vector<BusDemand>& served, const MachineLibrary& lib,
                              const std::vector<Disturbance>& disturbances,
                              const RelaySettings& relays, const SimConfig& cfg);

/// `t,quantity,id,value` rows.
std::string series_csv(const std::vector<SeriesRow>& rows);

}  // namespace gridres
