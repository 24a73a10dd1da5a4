#include "gridres/network.hpp"

#include <cmath>
#include <complex>
#include <set>
#include <tuple>

namespace gridres {

namespace {

// RTS-96 winter week: daily peak as % of weekly peak (Monday first) and
// hourly load as % of daily peak for weekdays and weekends.
constexpr double kDailyPct[7] = {93, 100, 98, 96, 94, 77, 75};
constexpr double kWinterWeekdayPct[24] = {67, 63, 60, 59, 59, 60, 74, 86, 95, 96, 96, 95,
                                          95, 95, 93, 94, 99, 100, 100, 96, 91, 83, 73, 63};
constexpr double kWinterWeekendPct[24] = {78, 72, 68, 66, 64, 65, 66, 70, 80, 88, 90, 91,
                                          90, 88, 87, 87, 91, 100, 99, 97, 94, 92, 87, 81};

}  // namespace

void Network::reindex() {
    index_.clear();
    for (std::size_t i = 0; i < buses.size(); ++i) index_.emplace(buses[i].id, i);
}

std::optional<std::size_t> Network::find_bus(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Network::bus_index(int id) const {
    auto idx = find_bus(id);
    if (!idx) throw InputError("unknown bus id " + std::to_string(id));
    return *idx;
}

double Network::total_p_max() const {
    double total = 0.0;
    for (const auto& g : generators) total += g.p_max;
    return total;
}

std::size_t Network::transformer_count() const {
    std::size_t n = 0;
    for (const auto& br : branches) n += br.is_transformer ? 1 : 0;
    return n;
}

std::size_t Network::line_count() const { return branches.size() - transformer_count(); }

std::size_t Network::load_bus_count() const {
    std::set<int> ids;
    for (const auto& l : loads) ids.insert(l.bus);
    return ids.size();
}

bool operator==(const Bus& a, const Bus& b) {
    return std::tie(a.id, a.area, a.base_kv, a.kind, a.voltage_setpoint, a.status, a.shunt_g_mw,
                    a.shunt_b_mvar) == std::tie(b.id, b.area, b.base_kv, b.kind,
                                                b.voltage_setpoint, b.status, b.shunt_g_mw,
                                                b.shunt_b_mvar);
}

bool operator==(const Branch& a, const Branch& b) {
    return std::tie(a.from_bus, a.to_bus, a.circuit_id, a.resistance, a.reactance, a.charging,
                    a.rating_lte, a.rating_ste, a.is_transformer, a.tap, a.infra_status,
                    a.oper_status) ==
           std::tie(b.from_bus, b.to_bus, b.circuit_id, b.resistance, b.reactance, b.charging,
                    b.rating_lte, b.rating_ste, b.is_transformer, b.tap, b.infra_status,
                    b.oper_status);
}

bool operator==(const Generator& a, const Generator& b) {
    return std::tie(a.bus, a.p_min, a.p_max, a.q_min, a.q_max, a.p_set, a.status,
                    a.machine_ref) == std::tie(b.bus, b.p_min, b.p_max, b.q_min, b.q_max,
                                               b.p_set, b.status, b.machine_ref);
}

bool operator==(const Load& a, const Load& b) {
    return std::tie(a.bus, a.p_nominal, a.q_nominal, a.served_fraction) ==
           std::tie(b.bus, b.p_nominal, b.q_nominal, b.served_fraction);
}

bool Network::operator==(const Network& o) const {
    return name == o.name && base_mva == o.base_mva && buses == o.buses &&
           branches == o.branches && generators == o.generators && loads == o.loads;
}

LoadProfile LoadProfile::rts_winter(std::size_t hours) {
    LoadProfile p;
    p.hourly_multipliers.reserve(hours);
    for (std::size_t h = 0; h < hours; ++h) {
        std::size_t day = (h / 24) % 7;
        std::size_t hod = h % 24;
        double hourly = day < 5 ? kWinterWeekdayPct[hod] : kWinterWeekendPct[hod];
        p.hourly_multipliers.push_back(kDailyPct[day] * hourly / 10000.0);
    }
    return p;
}

LoadProfile LoadProfile::flat(std::size_t hours, double multiplier) {
    LoadProfile p;
    p.hourly_multipliers.assign(hours, multiplier);
    return p;
}

std::vector<BusDemand> scheduled_load(const Network& net, const LoadProfile& profile,
                                      std::size_t hour) {
    if (hour >= profile.size())
        throw InputError("hour " + std::to_string(hour) + " outside load profile of length " +
                         std::to_string(profile.size()));
    const double m = profile.hourly_multipliers[hour];
    std::vector<double> p(net.buses.size(), 0.0), q(net.buses.size(), 0.0);
    std::vector<bool> has(net.buses.size(), false);
    for (const auto& l : net.loads) {
        std::size_t i = net.bus_index(l.bus);
        p[i] += l.p_nominal * m * l.served_fraction;
        q[i] += l.q_nominal * m * l.served_fraction;
        has[i] = true;
    }
    std::vector<BusDemand> out;
    for (std::size_t i = 0; i < net.buses.size(); ++i)
        if (has[i]) out.push_back({net.buses[i].id, p[i], q[i]});
    return out;
}

double total_apparent_demand(const std::vector<BusDemand>& demand) {
    std::complex<double> s{0.0, 0.0};
    for (const auto& d : demand) s += std::complex<double>(d.p_mw, d.q_mvar);
    return std::abs(s);
}

}  // namespace gridres
