#include "gridres/min_shed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Dense>

#include "gridres/lp.hpp"

namespace gridres {

namespace {

constexpr double kFlowTol = 1e-6;  // relative

struct IslandWork {
    std::size_t id = 0;
    std::size_t slack_local = 0;
    std::vector<std::size_t> buses;  // bus indices
    std::vector<std::size_t> gen_pos;  // local positions with online capacity
    std::vector<double> cap;
    std::vector<std::size_t> load_pos;
    std::vector<double> d;
    std::vector<std::size_t> lines;  // in-service branches inside the island
    std::vector<double> rating, limit;
    Eigen::MatrixXd ptdf;  // lines x buses

    double demand = 0.0;
    double loss = 0.0;
    double floor = 0.0;          // on total island shed
    std::vector<double> bus_floor;  // per load_pos
    bool pending = true;
    bool full_shed = false;

    std::vector<double> gen_out;  // per gen_pos
    std::vector<double> shed;     // per load_pos
    double shed_total() const { return std::accumulate(shed.begin(), shed.end(), 0.0); }
};

Eigen::MatrixXd build_ptdf(const Network& net, const std::vector<std::size_t>& buses,
                           const std::vector<std::size_t>& lines, std::size_t ref) {
    const auto n = static_cast<Eigen::Index>(buses.size());
    std::vector<Eigen::Index> local(net.buses.size(), -1);
    for (Eigen::Index k = 0; k < n; ++k) local[buses[k]] = k;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lines.size()), n);
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const auto& br = net.branches[lines[l]];
        auto f = local[net.bus_index(br.from_bus)];
        auto t = local[net.bus_index(br.to_bus)];
        double y = 1.0 / br.reactance;
        b(f, f) += y;
        b(t, t) += y;
        b(f, t) -= y;
        b(t, f) -= y;
        bf(static_cast<Eigen::Index>(l), f) += y;
        bf(static_cast<Eigen::Index>(l), t) -= y;
    }
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    if (n > 1) {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < n; ++k)
            if (k != static_cast<Eigen::Index>(ref)) keep.push_back(k);
        Eigen::MatrixXd br(n - 1, n - 1);
        for (Eigen::Index r = 0; r < n - 1; ++r)
            for (Eigen::Index c = 0; c < n - 1; ++c) br(r, c) = b(keep[r], keep[c]);
        Eigen::MatrixXd inv = br.partialPivLu().inverse();
        for (Eigen::Index r = 0; r < n - 1; ++r)
            for (Eigen::Index c = 0; c < n - 1; ++c) x(keep[r], keep[c]) = inv(r, c);
    }
    return bf * x;
}

// Local injections (MW) for the current gen_out / shed, losses spread over load.
Eigen::VectorXd injections(const IslandWork& w) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.buses.size()));
    for (std::size_t k = 0; k < w.gen_pos.size(); ++k) p(w.gen_pos[k]) += w.gen_out[k];
    for (std::size_t k = 0; k < w.load_pos.size(); ++k) {
        double share = w.demand > 0 ? w.d[k] / w.demand : 0.0;
        p(w.load_pos[k]) -= w.d[k] - w.shed[k] + w.loss * share;
    }
    if (w.demand <= 0) p(w.slack_local) -= w.loss;
    return p;
}

bool dc_flows_ok(const IslandWork& w) {
    if (w.lines.empty()) return true;
    Eigen::VectorXd f = w.ptdf * injections(w);
    for (std::size_t l = 0; l < w.lines.size(); ++l)
        if (std::abs(f(static_cast<Eigen::Index>(l))) > w.limit[l] * (1 + kFlowTol)) return false;
    return true;
}

void set_full_shed(IslandWork& w) {
    w.full_shed = true;
    w.shed = w.d;
    std::fill(w.gen_out.begin(), w.gen_out.end(), 0.0);
}

// Solves the DC problem for one island into gen_out / shed. Returns false when
// even full shed is not DC-feasible.
bool solve_dc(IslandWork& w, bool& used_lp) {
    const double cap_total = std::accumulate(w.cap.begin(), w.cap.end(), 0.0);
    const double need = w.demand + w.loss;
    used_lp = false;

    const bool unconstrained =
        w.floor <= 0.0 && std::all_of(w.bus_floor.begin(), w.bus_floor.end(),
                                      [](double f) { return f <= 0.0; });
    if (unconstrained && cap_total >= need) {
        for (std::size_t k = 0; k < w.cap.size(); ++k) w.gen_out[k] = need * w.cap[k] / cap_total;
        std::fill(w.shed.begin(), w.shed.end(), 0.0);
        if (dc_flows_ok(w)) return true;
    }
    used_lp = true;

    const std::size_t ng = w.gen_pos.size(), nd = w.load_pos.size();
    lp::Problem prob;
    for (std::size_t k = 0; k < ng; ++k) prob.add_var(0.0, w.cap[k]);
    for (std::size_t k = 0; k < nd; ++k) prob.add_var(1.0, w.d[k]);

    std::vector<std::pair<std::size_t, double>> all;
    for (std::size_t j = 0; j < ng + nd; ++j) all.emplace_back(j, 1.0);
    prob.add_row(all, lp::Sense::eq, need);
    if (w.floor > 0.0) {
        std::vector<std::pair<std::size_t, double>> sh;
        for (std::size_t k = 0; k < nd; ++k) sh.emplace_back(ng + k, 1.0);
        prob.add_row(sh, lp::Sense::ge, std::min(w.floor, w.demand));
    }
    for (std::size_t k = 0; k < nd; ++k)
        if (w.bus_floor[k] > 0.0)
            prob.add_row({{ng + k, 1.0}}, lp::Sense::ge, std::min(w.bus_floor[k], w.d[k]));

    for (std::size_t l = 0; l < w.lines.size(); ++l) {
        const auto row = w.ptdf.row(static_cast<Eigen::Index>(l));
        double c = 0.0, reach = 0.0;
        std::vector<std::pair<std::size_t, double>> coeffs;
        for (std::size_t k = 0; k < ng; ++k) {
            double h = row(w.gen_pos[k]);
            if (std::abs(h) < 1e-12) continue;
            coeffs.emplace_back(k, h);
            reach += std::abs(h) * w.cap[k];
        }
        for (std::size_t k = 0; k < nd; ++k) {
            double h = row(w.load_pos[k]);
            double share = w.demand > 0 ? w.d[k] / w.demand : 0.0;
            c += h * (w.d[k] + w.loss * share);
            if (std::abs(h) < 1e-12) continue;
            coeffs.emplace_back(ng + k, h);
            reach += std::abs(h) * w.d[k];
        }
        if (w.demand <= 0) c += row(w.slack_local) * w.loss;
        if (std::abs(c) + reach <= w.limit[l]) continue;  // can never bind
        prob.add_row(coeffs, lp::Sense::le, w.limit[l] + c);
        prob.add_row(coeffs, lp::Sense::ge, -w.limit[l] + c);
    }

    auto r1 = lp::solve(prob);
    if (r1.status != lp::Status::optimal) return false;
    const double best = r1.objective;

    // Second stage: among minimum-shed plans, stay close to a dispatch
    // proportional to capacity.
    lp::Problem p2 = prob;
    std::fill(p2.cost.begin(), p2.cost.end(), 0.0);
    {
        std::vector<std::pair<std::size_t, double>> sh;
        for (std::size_t k = 0; k < nd; ++k) sh.emplace_back(ng + k, 1.0);
        p2.add_row(sh, lp::Sense::le, best + 1e-7 * (1.0 + best));
    }
    const double gen_need = need - best;
    for (std::size_t k = 0; k < ng; ++k) {
        auto u = p2.add_var(1.0);
        auto v = p2.add_var(1.0);
        double target = cap_total > 0 ? gen_need * w.cap[k] / cap_total : 0.0;
        p2.add_row({{k, 1.0}, {u, -1.0}, {v, 1.0}}, lp::Sense::eq, target);
    }
    auto r2 = lp::solve(p2);
    const auto& x = r2.status == lp::Status::optimal ? r2.x : r1.x;
    for (std::size_t k = 0; k < ng; ++k) w.gen_out[k] = std::min(x[k], w.cap[k]);
    for (std::size_t k = 0; k < nd; ++k) w.shed[k] = std::clamp(x[ng + k], 0.0, w.d[k]);
    return true;
}

}  // namespace

ShedPlan solve_minimum_shed(const Network& net, const IslandSet& islands,
                            const std::vector<BusDemand>& demand, const ShedOptions& opts) {
    const std::size_t nb = net.buses.size();
    std::vector<double> pd(nb, 0.0), qd(nb, 0.0);
    for (const auto& d : demand) {
        auto i = net.bus_index(d.bus);
        pd[i] += d.p_mw;
        qd[i] += d.q_mvar;
    }

    ShedPlan plan;
    plan.shed_fraction.assign(nb, 0.0);
    plan.dispatch_mw.assign(net.generators.size(), 0.0);
    plan.islands.resize(islands.islands.size());

    std::vector<IslandWork> work;
    std::vector<double> gen_bus_cap(nb, 0.0);
    for (const auto& g : net.generators)
        if (g.online()) gen_bus_cap[net.bus_index(g.bus)] += g.p_max;

    for (std::size_t k = 0; k < islands.islands.size(); ++k) {
        const auto& isl = islands.islands[k];
        auto& rep = plan.islands[k];
        rep.island = k;
        rep.dead = isl.dead;
        for (auto b : isl.buses) rep.demand_mw += pd[b];
        if (isl.dead) {
            for (auto b : isl.buses) plan.shed_fraction[b] = 1.0;
            rep.dc_shed_mw = rep.shed_mw = rep.demand_mw;
            continue;
        }
        IslandWork w;
        w.id = k;
        w.buses = isl.buses;
        auto slack = select_slack(net, isl);
        std::vector<Eigen::Index> local(nb, -1);
        for (std::size_t i = 0; i < w.buses.size(); ++i) {
            auto b = w.buses[i];
            local[b] = static_cast<Eigen::Index>(i);
            if (b == slack) w.slack_local = i;
            if (gen_bus_cap[b] > 0) {
                w.gen_pos.push_back(i);
                w.cap.push_back(gen_bus_cap[b]);
            }
            if (pd[b] > 0) {
                w.load_pos.push_back(i);
                w.d.push_back(pd[b]);
            }
        }
        for (std::size_t b = 0; b < net.branches.size(); ++b) {
            const auto& br = net.branches[b];
            if (!br.in_service() || local[net.bus_index(br.from_bus)] < 0) continue;
            w.lines.push_back(b);
            double rating = opts.ratings == RatingSet::lte ? br.rating_lte : br.rating_ste;
            w.rating.push_back(rating);
            w.limit.push_back(rating);
        }
        w.ptdf = build_ptdf(net, w.buses, w.lines, w.slack_local);
        w.demand = rep.demand_mw;
        w.gen_out.assign(w.gen_pos.size(), 0.0);
        w.shed.assign(w.load_pos.size(), 0.0);
        w.bus_floor.assign(w.load_pos.size(), 0.0);
        work.push_back(std::move(w));
    }

    auto assemble = [&]() {
        plan.served.clear();
        std::fill(plan.dispatch_mw.begin(), plan.dispatch_mw.end(), 0.0);
        std::vector<double> bus_gen(nb, 0.0), bus_shed(nb, 0.0);
        for (const auto& w : work) {
            for (std::size_t k = 0; k < w.gen_pos.size(); ++k) bus_gen[w.buses[w.gen_pos[k]]] = w.gen_out[k];
            for (std::size_t k = 0; k < w.load_pos.size(); ++k) bus_shed[w.buses[w.load_pos[k]]] = w.shed[k];
        }
        for (std::size_t g = 0; g < net.generators.size(); ++g) {
            const auto& gen = net.generators[g];
            if (!gen.online()) continue;
            auto b = net.bus_index(gen.bus);
            if (gen_bus_cap[b] > 0) plan.dispatch_mw[g] = bus_gen[b] * gen.p_max / gen_bus_cap[b];
        }
        for (const auto& d : demand) {
            auto b = net.bus_index(d.bus);
            if (pd[b] <= 0 || islands.islands[islands.island_of_bus[b]].dead) continue;
            plan.shed_fraction[b] = std::clamp(bus_shed[b] / pd[b], 0.0, 1.0);
        }
        for (const auto& d : demand) {
            double keep = 1.0 - plan.shed_fraction[net.bus_index(d.bus)];
            plan.served.push_back({d.bus, d.p_mw * keep, d.q_mvar * keep});
        }
    };

    struct VoltageGuard {
        std::optional<IslandWork> snapshot;  // plan before the first voltage step
        double last_vmin = 0.0;
        bool off = false;
    };
    std::vector<VoltageGuard> guards(work.size());

    bool first = true;
    for (int iter = 0; iter <= opts.max_escalations; ++iter) {
        bool any = false;
        for (auto& w : work) {
            if (!w.pending) continue;
            any = true;
            bool used_lp = false;
            if (w.full_shed || !solve_dc(w, used_lp)) set_full_shed(w);
            auto& rep = plan.islands[w.id];
            if (first) {
                rep.dc_shed_mw = w.shed_total();
                rep.used_lp = used_lp;
            } else {
                ++rep.escalations;
            }
            if (w.full_shed) w.pending = false;
        }
        first = false;
        if (!any || !opts.ac_verify) break;

        assemble();
        PowerFlowOptions pfo = opts.power_flow;
        plan.solution = run_power_flow(net, islands, plan.served, plan.dispatch_mw, pfo);

        bool still = false;
        for (std::size_t wi = 0; wi < work.size(); ++wi) {
            auto& w = work[wi];
            if (!w.pending && !w.full_shed) continue;
            const IslandSolve* r = nullptr;
            for (const auto& s : plan.solution.islands)
                if (s.island == w.id) r = &s;
            if (w.full_shed) {
                w.pending = false;
                plan.islands[w.id].feasible = false;
                continue;
            }
            const double current = w.shed_total();
            if (!r || !r->converged) {
                // Shed where the best iterate sagged; island-wide when nothing
                // stands out or the weak buses are already fully shed.
                double vmin = std::numeric_limits<double>::infinity();
                for (auto p : w.load_pos) vmin = std::min(vmin, plan.solution.vm[w.buses[p]]);
                const double cut = std::max(opts.weak_voltage, vmin + 0.05);
                bool raised = false;
                for (std::size_t k = 0; k < w.load_pos.size(); ++k) {
                    if (plan.solution.vm[w.buses[w.load_pos[k]]] > cut) continue;
                    if (w.shed[k] >= w.d[k] * (1 - 1e-12)) continue;
                    w.bus_floor[k] = std::min(w.d[k], w.shed[k] + opts.weak_bus_step * w.d[k]);
                    raised = true;
                }
                w.floor = current;
                if (!raised) {
                    w.floor = current + opts.nonconvergence_step * w.demand;
                    if (w.floor >= w.demand * (1 - 1e-12)) w.full_shed = true;
                }
                still = true;
                continue;
            }
            bool violated = false;
            for (std::size_t l = 0; l < w.lines.size(); ++l) {
                double mva = plan.solution.flows[w.lines[l]].mva();
                if (mva > w.rating[l] * (1 + kFlowTol)) {
                    w.limit[l] *= w.rating[l] / mva * opts.tighten_margin;
                    violated = true;
                }
            }
            // Undervoltage: shed at the sagging buses while that lifts their
            // voltage; when it does not, go back to the plan before the first
            // voltage step and accept the violation.
            auto& guard = guards[wi];
            if (opts.min_load_voltage > 0 && !guard.off) {
                double vlow = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < w.load_pos.size(); ++k)
                    if (w.shed[k] < w.d[k] * (1 - 1e-12))
                        vlow = std::min(vlow, plan.solution.vm[w.buses[w.load_pos[k]]]);
                if (vlow < opts.min_load_voltage) {
                    if (guard.snapshot && vlow <= guard.last_vmin + 1e-4) {
                        const auto loss = w.loss;
                        w = *guard.snapshot;
                        w.loss = loss;
                        guard.off = true;
                        still = true;
                        continue;
                    }
                    if (!guard.snapshot) guard.snapshot = w;
                    guard.last_vmin = vlow;
                    for (std::size_t k = 0; k < w.load_pos.size(); ++k) {
                        if (plan.solution.vm[w.buses[w.load_pos[k]]] >= opts.min_load_voltage) continue;
                        if (w.shed[k] >= w.d[k] * (1 - 1e-12)) continue;
                        w.bus_floor[k] = std::min(w.d[k], w.shed[k] + opts.weak_bus_step * w.d[k]);
                        violated = true;
                    }
                }
            }
            // Slack units above their capacity: the loss estimate was short.
            double slack_p = 0.0;
            const auto slack_bus = w.buses[w.slack_local];
            for (std::size_t g = 0; g < net.generators.size(); ++g)
                if (net.generators[g].online() && net.bus_index(net.generators[g].bus) == slack_bus)
                    slack_p += plan.solution.gen_p[g];
            const double excess = slack_p - gen_bus_cap[slack_bus];
            const double old_loss = w.loss;
            w.loss = std::max(0.0, r->losses_mw);
            if (excess > 0.01) {
                violated = true;
                if (std::abs(w.loss - old_loss) < 0.01) w.floor = std::max(w.floor, current + excess);
            }
            if (!violated) {
                w.pending = false;
                continue;
            }
            w.floor = std::max(w.floor, current);
            still = true;
        }
        if (!still) break;
        if (iter == opts.max_escalations)
            for (auto& w : work)
                if (w.pending) {
                    set_full_shed(w);
                    w.pending = false;
                    plan.islands[w.id].feasible = false;
                }
    }

    assemble();
    if (opts.ac_verify)
        plan.solution = run_power_flow(net, islands, plan.served, plan.dispatch_mw, opts.power_flow);

    for (const auto& w : work) {
        auto& rep = plan.islands[w.id];
        rep.shed_mw = w.shed_total();
        if (w.full_shed) rep.feasible = false;
        if (opts.ac_verify) {
            for (auto b : w.buses) {
                double vm = plan.solution.vm[b];
                if (vm < opts.v_min || vm > opts.v_max) ++rep.voltage_violations;
            }
            for (const auto& s : plan.solution.islands)
                if (s.island == w.id && !s.converged) rep.feasible = false;
        }
    }
    for (const auto& rep : plan.islands) {
        plan.demand_mw += rep.demand_mw;
        plan.dc_shed_mw += rep.dc_shed_mw;
        plan.shed_mw += rep.shed_mw;
        plan.feasible = plan.feasible && rep.feasible;
    }
    return plan;
}

}  // namespace gridres
