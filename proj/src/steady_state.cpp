#include "gridres/steady_state.hpp"

#include <algorithm>

namespace gridres {

namespace {

double pct(double part, double whole) {
    if (whole <= 0.0) return 100.0;
    return std::clamp(100.0 * part / whole, 0.0, 100.0);
}

}  // namespace

Indicators compute_indicators(const Network& state, double scheduled_mw, double served_mw) {
    Indicators ind;
    std::size_t units = 0, online = 0, lines = 0, in_service = 0, intact = 0;
    double cap = 0.0, cap_online = 0.0;
    for (const auto& g : state.generators) {
        ++units;
        cap += g.p_max;
        if (g.online()) {
            ++online;
            cap_online += g.p_max;
        }
    }
    for (const auto& br : state.branches) {
        if (br.is_transformer) continue;
        ++lines;
        in_service += br.in_service();
        intact += br.intact();
    }
    ind.generator_units = pct(static_cast<double>(online), static_cast<double>(units));
    ind.generator_capacity = pct(cap_online, cap);
    ind.lines_in_service = pct(static_cast<double>(in_service), static_cast<double>(lines));
    ind.lines_available = pct(static_cast<double>(intact), static_cast<double>(lines));
    ind.load_served = pct(served_mw, scheduled_mw);
    return ind;
}

SteadyStateRecord hourly_steady_state(const Network& net, const LoadProfile& profile,
                                      std::size_t hour, const ShedOptions& opts) {
    if (hour >= profile.size()) throw InputError("hour outside the load profile");
    SteadyStateRecord rec;
    rec.hour = hour;
    rec.state = net;
    const double mult = profile.hourly_multipliers[hour];
    for (const auto& l : net.loads) rec.scheduled_mw += l.p_nominal * mult;

    rec.islands = process_topology(rec.state);
    auto demand = scheduled_load(rec.state, profile, hour);
    rec.plan = solve_minimum_shed(rec.state, rec.islands, demand, opts);
    for (const auto& s : rec.plan.served) rec.served_mw += s.p_mw;
    rec.indicators = compute_indicators(rec.state, rec.scheduled_mw, rec.served_mw);
    return rec;
}

}  // namespace gridres
