#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridres {

/// Error raised for input the library refuses to work with (bad files,
/// out-of-range arguments). Violations that are merely reportable go through
/// ValidationReport instead.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BusKind { pq, pv, slack };
enum class BusStatus { connected, islanded_dead };
enum class InfraStatus { intact, damaged };
enum class OperStatus { in_service, out_of_service };
enum class GenStatus { online, offline_islanded, offline_tripped };

struct Bus {
    int id = 0;
    int area = 0;
    double base_kv = 0.0;
    BusKind kind = BusKind::pq;
    double voltage_setpoint = 1.0;  // per-unit
    BusStatus status = BusStatus::connected;
    // Fixed shunt at 1 pu voltage: MW consumed, MVAr injected (capacitive > 0).
    double shunt_g_mw = 0.0;
    double shunt_b_mvar = 0.0;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    std::string circuit_id = "1";
    double resistance = 0.0;  // per-unit on system base
    double reactance = 0.0;
    double charging = 0.0;    // total line charging susceptance
    double rating_lte = 0.0;  // MVA, 24-hour
    double rating_ste = 0.0;  // MVA, 15-minute
    bool is_transformer = false;
    double tap = 1.0;         // off-nominal ratio at the from side
    InfraStatus infra_status = InfraStatus::intact;
    OperStatus oper_status = OperStatus::in_service;

    bool in_service() const { return oper_status == OperStatus::in_service; }
    bool intact() const { return infra_status == InfraStatus::intact; }
};

struct Generator {
    int bus = 0;
    double p_min = 0.0;  // MW
    double p_max = 0.0;
    double q_min = 0.0;  // MVAr
    double q_max = 0.0;
    double p_set = 0.0;
    GenStatus status = GenStatus::online;
    std::string machine_ref;

    bool online() const { return status == GenStatus::online; }
};

struct Load {
    int bus = 0;
    double p_nominal = 0.0;  // MW at peak
    double q_nominal = 0.0;  // MVAr at peak
    double served_fraction = 1.0;
};

/// The system under study. Element order is significant: indices into the
/// vectors are used as stable handles throughout the library.
class Network {
public:
    std::string name;
    std::string source;  // where it was read from; not part of equality
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;

    /// Rebuilds the id -> index lookup. Call after editing `buses`.
    void reindex();
    std::optional<std::size_t> find_bus(int id) const;
    /// Throws InputError for an unknown id.
    std::size_t bus_index(int id) const;

    double total_p_max() const;
    std::size_t transformer_count() const;
    std::size_t line_count() const;
    /// Number of distinct buses carrying at least one load record.
    std::size_t load_bus_count() const;

    bool operator==(const Network&) const;

private:
    std::unordered_map<int, std::size_t> index_;
};

bool operator==(const Bus&, const Bus&);
bool operator==(const Branch&, const Branch&);
bool operator==(const Generator&, const Generator&);
bool operator==(const Load&, const Load&);

/// Hourly demand multipliers applied to nominal load.
struct LoadProfile {
    std::vector<double> hourly_multipliers;

    std::size_t size() const { return hourly_multipliers.size(); }

    /// Winter-weekday/weekend shape built from the RTS-96 daily and hourly
    /// percentages, starting on a Monday at midnight of a peak week.
    static LoadProfile rts_winter(std::size_t hours);
    static LoadProfile flat(std::size_t hours, double multiplier = 1.0);
};

struct BusDemand {
    int bus = 0;
    double p_mw = 0.0;
    double q_mvar = 0.0;
};

/// Per-bus demand at `hour`: nominal x multiplier x served_fraction, summed
/// over the loads on each bus. Buses appear in network bus order, only when
/// they carry load.
std::vector<BusDemand> scheduled_load(const Network& net, const LoadProfile& profile,
                                      std::size_t hour);

/// Magnitude of the summed complex demand, |sum P + j sum Q|, in MVA.
double total_apparent_demand(const std::vector<BusDemand>& demand);

}  // namespace gridres
