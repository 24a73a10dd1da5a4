#include <gtest/gtest.h>

#include <cmath>

#include "../oracles.hpp"
#include "gridres/case_io.hpp"
#include "gridres/lp.hpp"
#include "gridres/min_shed.hpp"
#include "gridres/power_flow.hpp"
#include "gridres/steady_state.hpp"
#include "support.hpp"

using namespace gridres;

namespace {

std::vector<double> set_points(const Network& net) {
    std::vector<double> d;
    for (const auto& g : net.generators) d.push_back(g.online() ? g.p_set : 0.0);
    return d;
}

// Sum of branch flows leaving each bus, from the reported flows only.
std::vector<Complex> flow_injections(const Network& net, const PowerFlowSolution& sol) {
    std::vector<Complex> s(net.buses.size(), 0.0);
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        if (!br.in_service()) continue;
        s[net.bus_index(br.from_bus)] += Complex(sol.flows[b].p_from, sol.flows[b].q_from);
        s[net.bus_index(br.to_bus)] += Complex(sol.flows[b].p_to, sol.flows[b].q_to);
    }
    return s;
}

}  // namespace

TEST(PowerFlow, TwoBusAnalytic) {
    RandomSource rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const double r = gt::uniform(rng, 0.0, 0.05), x = gt::uniform(rng, 0.02, 0.2);
        const double p = gt::uniform(rng, 10, 100), q = gt::uniform(rng, -30, 60);
        auto net = oracle::two_bus_case(r, x, p, q);
        PowerFlowOptions opts;
        opts.tolerance = 1e-12;
        auto sol = run_power_flow(net, scheduled_load(net, LoadProfile::flat(1), 0), {0.0}, opts);
        ASSERT_TRUE(sol.converged) << trial;
        auto v2 = oracle::two_bus_voltage(1.0, {r, x}, {p / 100, q / 100});
        EXPECT_NEAR(sol.vm[1], std::abs(v2), 1e-8);
        EXPECT_NEAR(sol.va[1], std::arg(v2), 1e-8);
    }
}

TEST(PowerFlow, RtsPeakConverges) {
    auto net = load_case("rts96");
    auto sol = run_power_flow(net, scheduled_load(net, LoadProfile::flat(1), 0), set_points(net));
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(sol.iterations, 20);
    EXPECT_LE(sol.max_mismatch, 1e-6);
}

TEST(PowerFlow, BusAndIslandBalance) {
    auto net = load_case("rts96");
    // Split the system: open every tie between areas.
    for (auto& br : net.branches)
        if (net.buses[net.bus_index(br.from_bus)].area != net.buses[net.bus_index(br.to_bus)].area)
            br.oper_status = OperStatus::out_of_service;
    auto islands = process_topology(net);
    ASSERT_EQ(islands.islands.size(), 3u);
    auto demand = scheduled_load(net, LoadProfile::flat(1, 0.8), 0);
    auto sol = run_power_flow(net, islands, demand, set_points(net));
    ASSERT_TRUE(sol.converged);

    // Bus balance: generation - load - shunt = flows out, every bus.
    auto out = flow_injections(net, sol);
    std::vector<Complex> inj(net.buses.size(), 0.0);
    for (std::size_t g = 0; g < net.generators.size(); ++g)
        inj[net.bus_index(net.generators[g].bus)] += Complex(sol.gen_p[g], sol.gen_q[g]);
    for (const auto& d : demand) inj[net.bus_index(d.bus)] -= Complex(d.p_mw, d.q_mvar);
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        const double v2 = sol.vm[i] * sol.vm[i];
        inj[i] -= Complex(net.buses[i].shunt_g_mw * v2, -net.buses[i].shunt_b_mvar * v2);
        EXPECT_LE(std::abs(inj[i] - out[i]) / net.base_mva, 1e-6) << "bus " << net.buses[i].id;
    }
    // Island balance: generation = load + shunt + branch losses.
    for (std::size_t k = 0; k < islands.islands.size(); ++k) {
        double gen = 0, load = 0, loss = 0;
        for (std::size_t g = 0; g < net.generators.size(); ++g)
            if (islands.island_of_bus[net.bus_index(net.generators[g].bus)] == k) gen += sol.gen_p[g];
        for (const auto& d : demand)
            if (islands.island_of_bus[net.bus_index(d.bus)] == k) load += d.p_mw;
        for (auto i : islands.islands[k].buses) load += net.buses[i].shunt_g_mw * sol.vm[i] * sol.vm[i];
        for (std::size_t b = 0; b < net.branches.size(); ++b)
            if (net.branches[b].in_service() &&
                islands.island_of_bus[net.bus_index(net.branches[b].from_bus)] == k)
                loss += sol.flows[b].p_from + sol.flows[b].p_to;
        EXPECT_LE(std::abs(gen - load - loss) / net.base_mva, 1e-6) << "island " << k;
    }
}

TEST(PowerFlow, DeadIslandReportsZero) {
    auto net = load_case("two_area");
    for (auto& br : net.branches)
        if (br.from_bus == 103 && br.to_bus == 201) br.oper_status = OperStatus::out_of_service;
    for (auto& g : net.generators)
        if (g.bus == 202) g.status = GenStatus::offline_tripped;
    auto islands = process_topology(net);
    auto sol = run_power_flow(net, islands, scheduled_load(net, LoadProfile::flat(1), 0), set_points(net));
    EXPECT_EQ(sol.vm[net.bus_index(201)], 0.0);
    EXPECT_EQ(sol.vm[net.bus_index(202)], 0.0);
}

TEST(Lp, KnownOptima) {
    // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6  -> (1.6, 1.2), obj -2.8
    lp::Problem p;
    auto x = p.add_var(-1), y = p.add_var(-1);
    p.add_row({{x, 1}, {y, 2}}, lp::Sense::le, 4);
    p.add_row({{x, 3}, {y, 1}}, lp::Sense::le, 6);
    auto r = lp::solve(p);
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.objective, -2.8, 1e-9);
    EXPECT_NEAR(r.x[0], 1.6, 1e-9);

    lp::Problem q;  // equality plus bounds, infeasible
    auto a = q.add_var(1, 1.0);
    q.add_row({{a, 1}}, lp::Sense::eq, 2);
    EXPECT_EQ(lp::solve(q).status, lp::Status::infeasible);

    lp::Problem u;
    auto b = u.add_var(-1);
    u.add_row({{b, 1}}, lp::Sense::ge, 1);
    EXPECT_EQ(lp::solve(u).status, lp::Status::unbounded);
}

TEST(Lp, RandomBoxProblemsMatchEnumeration) {
    // Two variables, random constraints: compare against vertex enumeration.
    RandomSource rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        lp::Problem p;
        const double cx = gt::uniform(rng, -1, 1), cy = gt::uniform(rng, -1, 1);
        p.add_var(cx, 10);
        p.add_var(cy, 10);
        std::vector<std::vector<double>> a{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        std::vector<double> b{10, 0, 10, 0};
        for (int k = gt::pick(rng, 1, 4); k > 0; --k) {
            double u = gt::uniform(rng, -1, 1), v = gt::uniform(rng, -1, 1), rhs = gt::uniform(rng, 0.5, 8);
            p.add_row({{0, u}, {1, v}}, lp::Sense::le, rhs);
            a.push_back({u, v});
            b.push_back(rhs);
        }
        auto r = lp::solve(p);
        ASSERT_EQ(r.status, lp::Status::optimal);
        // Enumerate vertices of the box plus the random rows.
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                double det = a[i][0] * a[j][1] - a[i][1] * a[j][0];
                if (std::abs(det) < 1e-12) continue;
                double x = (b[i] * a[j][1] - a[i][1] * b[j]) / det, y = (a[i][0] * b[j] - b[i] * a[j][0]) / det;
                bool ok = true;
                for (std::size_t k = 0; k < a.size(); ++k) ok &= a[k][0] * x + a[k][1] * y <= b[k] + 1e-9;
                if (ok) best = std::min(best, cx * x + cy * y);
            }
        EXPECT_NEAR(r.objective, best, 1e-8) << trial;
    }
}

TEST(MinShed, MatchesBruteForceOnSmallSystems) {
    RandomSource rng(4242);
    int binding = 0;
    for (int trial = 0; trial < 25; ++trial) {
        auto sys = oracle::random_shed_system(rng);
        ShedOptions opts;
        opts.ac_verify = false;
        auto plan = solve_minimum_shed(sys.net, connected_islands(sys.net), sys.demand, opts);
        double oracle_shed = oracle::brute_force_min_shed(sys.net, sys.demand);
        EXPECT_NEAR(plan.shed_mw, oracle_shed, 0.1) << "trial " << trial;
        EXPECT_LE(plan.shed_mw, oracle_shed + 1e-6) << "grid search cannot beat the optimum";
        if (oracle_shed > 0.05) ++binding;
    }
    EXPECT_GE(binding, 5) << "generator should produce systems where limits bind";
}

TEST(MinShed, DeadIslandShedsEverything) {
    auto net = load_case("two_area");
    for (auto& br : net.branches)
        if (br.from_bus == 103 && br.to_bus == 201) br.oper_status = OperStatus::out_of_service;
    for (auto& g : net.generators)
        if (g.bus == 202) g.status = GenStatus::offline_tripped;
    auto rec = hourly_steady_state(net, LoadProfile::flat(1), 0);
    for (auto bus : {201, 202}) EXPECT_EQ(rec.plan.shed_fraction[net.bus_index(bus)], 1.0);
    for (const auto& s : rec.plan.served)
        if (s.bus == 201 || s.bus == 202) EXPECT_EQ(s.p_mw, 0.0);
}

TEST(MinShed, IntactRtsShedsNothing) {
    auto net = load_case("rts96");
    auto rec = hourly_steady_state(net, LoadProfile::flat(1), 0);
    EXPECT_TRUE(rec.plan.solution.converged);
    EXPECT_NEAR(rec.plan.shed_mw, 0.0, 1e-9);
    EXPECT_NEAR(rec.indicators.load_served, 100.0, 1e-9);
}

TEST(MinShed, ServedNeverExceedsDemand) {
    RandomSource rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        auto sys = oracle::random_shed_system(rng);
        auto plan = solve_minimum_shed(sys.net, connected_islands(sys.net), sys.demand);
        ASSERT_EQ(plan.served.size(), sys.demand.size());
        for (std::size_t k = 0; k < sys.demand.size(); ++k) {
            EXPECT_GE(plan.served[k].p_mw, -1e-9);
            EXPECT_LE(plan.served[k].p_mw, sys.demand[k].p_mw + 1e-9);
        }
        for (std::size_t g = 0; g < sys.net.generators.size(); ++g)
            EXPECT_LE(plan.dispatch_mw[g], sys.net.generators[g].p_max + 1e-6);
    }
}
