#include "gridres/topology.hpp"

#include <algorithm>
#include <queue>

namespace gridres {

std::size_t IslandSet::dead_count() const {
    std::size_t n = 0;
    for (const auto& isl : islands) n += isl.dead ? 1 : 0;
    return n;
}

IslandSet connected_islands(const Network& net) {
    const std::size_t n = net.buses.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& br : net.branches) {
        if (!br.in_service()) continue;
        auto f = net.bus_index(br.from_bus);
        auto t = net.bus_index(br.to_bus);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }

    constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
    IslandSet set;
    set.island_of_bus.assign(n, unassigned);
    for (std::size_t root = 0; root < n; ++root) {
        if (set.island_of_bus[root] != unassigned) continue;
        const std::size_t id = set.islands.size();
        Island isl;
        std::queue<std::size_t> frontier;
        frontier.push(root);
        set.island_of_bus[root] = id;
        while (!frontier.empty()) {
            auto b = frontier.front();
            frontier.pop();
            isl.buses.push_back(b);
            for (auto nb : adj[b]) {
                if (set.island_of_bus[nb] != unassigned) continue;
                set.island_of_bus[nb] = id;
                frontier.push(nb);
            }
        }
        std::sort(isl.buses.begin(), isl.buses.end());
        set.islands.push_back(std::move(isl));
    }

    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        if (gen.status == GenStatus::offline_tripped) continue;
        set.islands[set.island_of_bus[net.bus_index(gen.bus)]].generators.push_back(g);
    }
    for (auto& isl : set.islands) isl.dead = isl.generators.empty();
    return set;
}

void apply_islanding(Network& net, const IslandSet& islands) {
    for (std::size_t i = 0; i < net.buses.size(); ++i)
        net.buses[i].status = islands.islands[islands.island_of_bus[i]].dead
                                  ? BusStatus::islanded_dead
                                  : BusStatus::connected;
    auto dead_bus = [&](int id) {
        return net.buses[net.bus_index(id)].status == BusStatus::islanded_dead;
    };
    for (auto& g : net.generators) {
        if (g.status == GenStatus::offline_tripped) continue;
        g.status = dead_bus(g.bus) ? GenStatus::offline_islanded : GenStatus::online;
    }
    for (auto& l : net.loads)
        if (dead_bus(l.bus)) l.served_fraction = 0.0;
    for (auto& br : net.branches)
        if (br.in_service() && dead_bus(br.from_bus) && dead_bus(br.to_bus))
            br.oper_status = OperStatus::out_of_service;
}

IslandSet process_topology(Network& net) {
    auto set = connected_islands(net);
    apply_islanding(net, set);
    return set;
}

}  // namespace gridres
