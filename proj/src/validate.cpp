#include <set>
#include <string>
#include <tuple>

#include "gridres/case_io.hpp"

namespace gridres {

namespace {

std::string branch_label(const Branch& br) {
    return "branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + "(" +
           br.circuit_id + ")";
}

}  // namespace

ValidationReport validate(const Network& net) {
    ValidationReport rep;
    auto add = [&](std::string kind, std::string element, std::string detail) {
        rep.violations.push_back({std::move(kind), std::move(element), std::move(detail)});
    };

    if (net.buses.empty()) add("no buses", "network", "bus list is empty");
    if (!(net.base_mva > 0)) add("bad base", "network", "base_mva must be positive");

    std::set<int> ids;
    for (const auto& b : net.buses) {
        auto label = "bus " + std::to_string(b.id);
        if (!ids.insert(b.id).second) add("duplicate id", label, "bus id appears twice");
        if (!(b.base_kv > 0)) add("bad base voltage", label, "base_kv must be positive");
        if (!(b.voltage_setpoint > 0)) add("bad setpoint", label, "voltage setpoint <= 0");
    }
    auto known = [&](int id) { return ids.count(id) > 0; };

    std::set<std::tuple<int, int, std::string>> keys;
    for (const auto& br : net.branches) {
        auto label = branch_label(br);
        if (!known(br.from_bus) || !known(br.to_bus))
            add("dangling reference", label, "endpoint bus not in bus list");
        if (br.from_bus == br.to_bus) add("self loop", label, "both ends on the same bus");
        if (br.reactance == 0.0) add("zero reactance", label, "reactance must be nonzero");
        if (!(br.rating_lte > 0)) add("bad rating", label, "rating_lte must be positive");
        if (br.rating_ste < br.rating_lte) add("bad rating", label, "rating_ste < rating_lte");
        if (!(br.tap > 0)) add("bad tap", label, "tap ratio must be positive");
        if (!br.intact() && br.in_service())
            add("status", label, "damaged branch marked in service");
        auto key = std::make_tuple(std::min(br.from_bus, br.to_bus),
                                   std::max(br.from_bus, br.to_bus), br.circuit_id);
        if (!keys.insert(key).second) add("duplicate id", label, "branch appears twice");
    }

    for (std::size_t i = 0; i < net.generators.size(); ++i) {
        const auto& g = net.generators[i];
        auto label = "generator " + std::to_string(i) + " at bus " + std::to_string(g.bus);
        if (!known(g.bus)) add("dangling reference", label, "bus not in bus list");
        if (g.p_min > g.p_max) add("limits", label, "p_min > p_max");
        if (g.q_min > g.q_max) add("limits", label, "q_min > q_max");
        if (g.online() && (g.p_set < g.p_min || g.p_set > g.p_max))
            add("limits", label, "p_set outside [p_min, p_max]");
        if (g.machine_ref.empty()) add("missing machine", label, "machine_ref is empty");
    }

    for (std::size_t i = 0; i < net.loads.size(); ++i) {
        const auto& l = net.loads[i];
        auto label = "load " + std::to_string(i) + " at bus " + std::to_string(l.bus);
        if (!known(l.bus)) add("dangling reference", label, "bus not in bus list");
        if (l.served_fraction < 0.0 || l.served_fraction > 1.0)
            add("served fraction", label, "served_fraction outside [0, 1]");
    }
    return rep;
}

}  // namespace gridres
