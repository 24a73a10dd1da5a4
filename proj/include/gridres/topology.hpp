#pragma once

#include <cstddef>
#include <vector>

#include "gridres/network.hpp"

namespace gridres {

struct Island {
    std::vector<std::size_t> buses;       // bus indices, ascending
    std::vector<std::size_t> generators;  // online generator indices on these buses
    bool dead = false;                    // no online generator
};

/// Partition of buses by in-service branch connectivity. Islands are ordered
/// by their smallest bus index, so the numbering does not depend on branch order.
struct IslandSet {
    std::vector<std::size_t> island_of_bus;
    std::vector<Island> islands;

    std::size_t dead_count() const;
};

IslandSet connected_islands(const Network& net);

/// Marks the consequences of islanding on `net`: buses of dead islands become
/// islanded-dead, their online generators offline-islanded, their loads
/// served_fraction 0, and intact branches inside them out of service.
/// Elements are never removed.
void apply_islanding(Network& net, const IslandSet& islands);

/// connected_islands + apply_islanding.
IslandSet process_topology(Network& net);

}  // namespace gridres
