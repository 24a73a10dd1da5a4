#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridres/network.hpp"

namespace gridres {

using Complex = std::complex<double>;

inline constexpr double kSystemHz = 60.0;
inline constexpr double kTimeEps = 1e-9;  // slack on timer comparisons

// ---- distance -------------------------------------------------------------

struct Zone {
    double reach = 0.0;         // fraction of line impedance
    double delay_cycles = 0.0;  // at 60 Hz
    double delay_s() const { return delay_cycles / kSystemHz; }
};

struct DistanceRelaySettings {
    std::vector<Zone> zones = {{0.90, 0}, {1.20, 15}, {2.20, 90}};
    double current_floor = 1e-4;  // pu; below it the relay has no measurement
    void check() const;
};

/// Relay at one end of a branch.
struct DistancePlacement {
    std::size_t branch = 0;
    bool at_from = true;
};

/// Z = V / I, or nothing when |I| is below the floor.
std::optional<Complex> apparent_impedance(Complex v, Complex i, double current_floor = 1e-4);

/// Mho circle through the origin with diameter reach * z_line.
bool mho_contains(Complex z, Complex z_line, double reach);

struct DistanceRelayState {
    // Per zone: timing since pickup, or negative when dropped out.
    std::vector<double> timer;
    bool operated = false;
};

/// One evaluation. Every zone that contains Z keeps its own timer running
/// (started at 0 on the step it picks up) and resets on dropout; the relay
/// trips on the first zone whose timer reaches its delay. Returns the
/// operating zone (1-based) once, on the tripping step.
std::optional<int> distance_step(const DistanceRelaySettings& s, DistanceRelayState& state,
                                 std::optional<Complex> z, Complex z_line, double dt);

// ---- load shedding --------------------------------------------------------

struct ShedStage {
    double threshold = 0.0;  // Hz or pu
    double fraction = 0.0;   // 0..1
    double pickup_s = 0.0;
};

enum class ShedBase { remaining, nominal };

struct SheddingSettings {
    std::vector<ShedStage> stages;
    double breaker_s = 0.0;
    ShedBase base = ShedBase::remaining;
    void check(std::string_view what) const;
};

SheddingSettings default_ufls();
SheddingSettings default_uvls();

struct StageState {
    bool picked_up = false;
    double timer = 0.0;
    bool operated = false;        // pickup complete, breaker timing
    double breaker_timer = 0.0;
    bool done = false;            // breaker opened
};

struct ShedRelayState {
    std::vector<StageState> stages;
};

struct ShedAction {
    std::size_t stage = 0;
    double fraction = 0.0;  // as configured
};

/// Under-threshold load shedding relay (frequency in Hz or voltage in pu).
/// A stage picks up when the signal is strictly below its threshold, operates
/// once the pickup timer reaches its delay, and opens its breaker
/// `breaker_s` later. Dropout before operation resets the stage. Operated
/// stages never operate again.
std::vector<ShedAction> shed_step(const SheddingSettings& s, ShedRelayState& state,
                                  double signal, double dt);

inline std::vector<ShedAction> ufls_step(const SheddingSettings& s, ShedRelayState& state,
                                         double hz, double dt) {
    return shed_step(s, state, hz, dt);
}
inline std::vector<ShedAction> uvls_step(const SheddingSettings& s, ShedRelayState& state,
                                         double pu, double dt) {
    return shed_step(s, state, pu, dt);
}

/// Remaining load fraction after applying `fraction` under `base`.
double apply_shed(double remaining, double fraction, ShedBase base);

// ---- out of step ----------------------------------------------------------

/// Generators to disconnect: the flagged machines when corrective action is
/// enabled, nothing otherwise.
std::vector<std::size_t> out_of_step_corrective(const std::vector<std::size_t>& flagged,
                                                bool enabled);

// ---- settings bundle and file format --------------------------------------

struct RelaySettings {
    DistanceRelaySettings distance;
    std::vector<DistancePlacement> placements;
    SheddingSettings ufls = default_ufls();
    SheddingSettings uvls = default_uvls();
    std::vector<bool> shed_enabled;  // per bus; empty means all load buses

    /// Defaults for a network: distance relays at both ends of inter-area ties
    /// and of every line with both ends at 200 kV or above (the 230 kV system).
    static RelaySettings defaults(const Network& net);
};

/// Relay settings file: sections introduced by `[distance]`, `[zones]`,
/// `[ufls]`, `[uvls]`, `[breakers]`, `[options]`; each section is CSV with a
/// header row. Omitted sections keep their defaults.
RelaySettings parse_relay_settings(std::string_view text, const Network& net);
std::string write_relay_settings(const RelaySettings& s, const Network& net);

}  // namespace gridres
