#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "gridres/case_io.hpp"
#include "gridres/topology.hpp"
#include "support.hpp"

using namespace gridres;

namespace {

// Union-find oracle, independent of the library's traversal.
struct Dsu {
    std::vector<std::size_t> p;
    explicit Dsu(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    std::size_t find(std::size_t x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void join(std::size_t a, std::size_t b) { p[find(a)] = find(b); }
};

Network random_net(RandomSource& rng) {
    Network net;
    const int n = gt::pick(rng, 1, 12);
    for (int i = 1; i <= n; ++i) net.buses.push_back(gt::bus(i * 10));
    net.reindex();
    int c = 0;
    for (auto [f, t] : gt::random_graph(rng, n, gt::pick(rng, 0, 4))) {
        auto br = gt::line(f * 10, t * 10, 0.0, 0.1, 0.0, 100.0, std::to_string(++c));
        if (rng.draw() < 0.4) br.oper_status = OperStatus::out_of_service;
        net.branches.push_back(br);
    }
    for (int i = 1; i <= n; ++i) {
        if (rng.draw() < 0.3) {
            auto g = gt::gen(i * 10, 50, 10);
            if (rng.draw() < 0.3) g.status = GenStatus::offline_tripped;
            net.generators.push_back(g);
        }
        if (rng.draw() < 0.5) net.loads.push_back(gt::load(i * 10, 5));
    }
    return net;
}

}  // namespace

TEST(Topology, MatchesUnionFindOnRandomGraphs) {
    RandomSource rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        auto net = random_net(rng);
        auto set = connected_islands(net);
        Dsu dsu(net.buses.size());
        for (const auto& br : net.branches)
            if (br.in_service()) dsu.join(net.bus_index(br.from_bus), net.bus_index(br.to_bus));
        for (std::size_t a = 0; a < net.buses.size(); ++a)
            for (std::size_t b = 0; b < net.buses.size(); ++b)
                ASSERT_EQ(set.island_of_bus[a] == set.island_of_bus[b], dsu.find(a) == dsu.find(b));
        // Every bus in exactly one island; islands ordered by smallest bus.
        std::size_t total = 0, last_min = 0;
        for (std::size_t k = 0; k < set.islands.size(); ++k) {
            const auto& is = set.islands[k];
            total += is.buses.size();
            ASSERT_TRUE(std::is_sorted(is.buses.begin(), is.buses.end()));
            if (k > 0) ASSERT_GT(is.buses.front(), last_min);
            last_min = is.buses.front();
            bool has_gen = false;
            for (std::size_t g = 0; g < net.generators.size(); ++g)
                if (net.generators[g].online() &&
                    set.island_of_bus[net.bus_index(net.generators[g].bus)] == k)
                    has_gen = true;
            ASSERT_EQ(is.dead, !has_gen);
        }
        ASSERT_EQ(total, net.buses.size());
    }
}

TEST(Topology, NumberingIgnoresBranchOrder) {
    RandomSource rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto net = random_net(rng);
        auto a = connected_islands(net);
        std::reverse(net.branches.begin(), net.branches.end());
        auto b = connected_islands(net);
        EXPECT_EQ(a.island_of_bus, b.island_of_bus);
    }
}

TEST(Topology, DeadIslandConsequences) {
    RandomSource rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto net = random_net(rng);
        const auto before = net;
        auto set = process_topology(net);
        ASSERT_EQ(net.buses.size(), before.buses.size());
        ASSERT_EQ(net.branches.size(), before.branches.size());
        for (std::size_t i = 0; i < net.buses.size(); ++i) {
            bool dead = set.islands[set.island_of_bus[i]].dead;
            EXPECT_EQ(net.buses[i].status == BusStatus::islanded_dead, dead);
        }
        for (const auto& l : net.loads)
            if (set.islands[set.island_of_bus[net.bus_index(l.bus)]].dead) EXPECT_EQ(l.served_fraction, 0.0);
        for (const auto& br : net.branches)
            if (set.islands[set.island_of_bus[net.bus_index(br.from_bus)]].dead) EXPECT_FALSE(br.in_service());
    }
}

TEST(Topology, IntactRtsIsOneLiveIsland) {
    auto net = load_case("rts96");
    auto set = process_topology(net);
    EXPECT_EQ(set.islands.size(), 1u);
    EXPECT_EQ(set.dead_count(), 0u);
}
