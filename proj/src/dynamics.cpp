#include "gridres/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gridres/csv.hpp"
#include "gridres/topology.hpp"

namespace gridres {

namespace {

constexpr double kOmegaS = 2.0 * std::numbers::pi * kSystemHz;
const Complex kJ(0.0, 1.0);

std::string branch_name(const Network& net, std::size_t b) {
    const auto& br = net.branches[b];
    return "branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + " ckt " +
           br.circuit_id;
}

std::string gen_name(const Network& net, std::size_t g) {
    return "gen " + std::to_string(g) + " @ bus " + std::to_string(net.generators[g].bus);
}

bool finite(const MachineState& s) {
    return std::isfinite(s.delta) && std::isfinite(s.dw) && std::isfinite(s.eqp) &&
           std::isfinite(s.edp) && std::isfinite(s.efd) && std::isfinite(s.pm);
}

void clamp_limits(const DynamicModel& model, std::vector<MachineState>& x, const SimConfig& cfg) {
    if (!cfg.limiters) return;
    for (std::size_t m = 0; m < x.size(); ++m) {
        const auto& p = model.machines[m].p;
        if (p.classical) continue;
        x[m].efd = std::clamp(x[m].efd, p.efd_min, p.efd_max);
        if (model.machines[m].governor()) x[m].pm = std::clamp(x[m].pm, p.gate_min, p.gate_max);
    }
}

}  // namespace

void SimConfig::check() const {
    if (!(dt > 0 && dt < t_end)) throw InputError("simulation: need 0 < dt < t_end");
    if (!(disturbance_time >= 0 && disturbance_time < t_end))
        throw InputError("simulation: disturbance time must lie in [0, t_end)");
    if (!(instability_deg > 0)) throw InputError("simulation: instability threshold must be positive");
    if (!(freq_filter_s > 0)) throw InputError("simulation: frequency filter must be positive");
    if (inner_max < 1 || decimation < 1) throw InputError("simulation: bad iteration settings");
}

const char* to_string(Verdict v) { return v == Verdict::stable ? "stable" : "unstable"; }

void DynamicModel::refactor() {
    const std::size_t nb = net.buses.size();
    Eigen::MatrixXcd y = build_ybus(net);
    for (std::size_t i = 0; i < nb; ++i)
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += load_y[i] * load_remaining[i];
    y_source_.assign(machines.size(), 0.0);
    for (std::size_t m = 0; m < machines.size(); ++m) {
        if (!machines[m].online) continue;
        const auto& p = machines[m].p;
        y_source_[m] = machines[m].scale / Complex(p.ra, p.xdp);
        auto b = static_cast<Eigen::Index>(machines[m].bus);
        y(b, b) += y_source_[m];
    }

    auto islands = connected_islands(net);
    island_of_bus = islands.island_of_bus;
    std::vector<bool> live(islands.islands.size(), false);
    for (const auto& mc : machines)
        if (mc.online) live[island_of_bus[mc.bus]] = true;
    energized.assign(nb, false);
    for (std::size_t i = 0; i < nb; ++i) {
        energized[i] = live[island_of_bus[i]];
        if (energized[i]) continue;
        auto k = static_cast<Eigen::Index>(i);
        y.row(k).setZero();
        y.col(k).setZero();
        y(k, k) = 1.0;
    }
    lu_.compute(y);
}

Complex DynamicModel::emf(std::size_t m, const MachineState& s) const {
    (void)m;
    return Complex(s.eqp, -s.edp) * std::polar(1.0, s.delta);
}

Complex DynamicModel::current(std::size_t m, const MachineState& s,
                              const std::vector<Complex>& v) const {
    const auto& p = machines[m].p;
    return (emf(m, s) - v[machines[m].bus]) / Complex(p.ra, p.xdp);
}

double DynamicModel::electrical_power(std::size_t m, const MachineState& s,
                                      const std::vector<Complex>& v) const {
    return (emf(m, s) * std::conj(current(m, s, v))).real();
}

std::vector<Complex> DynamicModel::solve_network(const std::vector<MachineState>& x) const {
    const auto nb = static_cast<Eigen::Index>(net.buses.size());
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nb);
    for (std::size_t m = 0; m < machines.size(); ++m)
        if (machines[m].online && energized[machines[m].bus])
            rhs(static_cast<Eigen::Index>(machines[m].bus)) += emf(m, x[m]) * y_source_[m];
    Eigen::VectorXcd v = lu_.solve(rhs);
    std::vector<Complex> out(static_cast<std::size_t>(nb));
    for (Eigen::Index i = 0; i < nb; ++i) out[i] = energized[i] ? v(i) : Complex(0.0);
    return out;
}

Initialized init_from_power_flow(const Network& net, const PowerFlowSolution& sol,
                                 const std::vector<BusDemand>& served, const MachineLibrary& lib) {
    if (!sol.converged) throw InputError("dynamics: power flow did not converge");
    Initialized out;
    auto& model = out.model;
    model.net = net;
    const std::size_t nb = net.buses.size();
    const auto v = sol.voltages();

    model.load_y.assign(nb, 0.0);
    model.load_remaining.assign(nb, 1.0);
    for (const auto& d : served) {
        auto i = net.bus_index(d.bus);
        if (sol.vm[i] <= 0) continue;
        model.load_y[i] += Complex(d.p_mw, -d.q_mvar) / net.base_mva / (sol.vm[i] * sol.vm[i]);
    }

    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        auto b = net.bus_index(gen.bus);
        if (!gen.online() || sol.vm[b] <= 0) continue;
        Machine mc;
        mc.gen = g;
        mc.bus = b;
        mc.p = lib.get(gen.machine_ref);
        mc.scale = mc.p.mva_base / net.base_mva;

        const Complex s_sys = Complex(sol.gen_p[g], sol.gen_q[g]) / net.base_mva;
        const Complex i = std::conj(s_sys / v[b]) / mc.scale;
        const auto& p = mc.p;
        MachineState x;
        const Complex ep = v[b] + Complex(p.ra, p.xdp) * i;
        if (p.classical) {
            x.delta = std::arg(ep);
            x.eqp = std::abs(ep);
            x.edp = 0.0;
            x.efd = x.eqp;
        } else {
            const Complex eq = v[b] + Complex(p.ra, p.xq) * i;
            x.delta = std::arg(eq);
            const Complex rot = kJ * std::polar(1.0, -x.delta);
            const Complex idq = i * rot, vdq = v[b] * rot;
            x.edp = (p.xq - p.xdp) * idq.imag();
            x.eqp = vdq.imag() + p.ra * idq.imag() + p.xdp * idq.real();
            x.efd = x.eqp + (p.xd - p.xdp) * idq.real();
            if (x.efd < p.efd_min - 1e-9 || x.efd > p.efd_max + 1e-9)
                throw InputError("dynamics: " + gen_name(net, g) + " needs field voltage " +
                                 csv::format(x.efd) + " outside its limits");
            mc.vref = std::abs(v[b]) + x.efd / p.ka;
        }
        x.pm = (ep * std::conj(i)).real();
        mc.pref = x.pm;
        if (mc.governor()) {
            if (x.pm > p.gate_max * 1.02 + 1e-6 || x.pm < p.gate_min - 1e-6)
                throw InputError("dynamics: " + gen_name(net, g) + " output " +
                                 csv::format(x.pm * p.mva_base) + " MW outside its gate limits");
            mc.p.gate_max = std::max(p.gate_max, x.pm);
        }
        model.machines.push_back(std::move(mc));
        out.state.machines.push_back(x);
    }
    model.refactor();
    out.state.t = 0.0;
    out.state.v = model.solve_network(out.state.machines);
    return out;
}

std::vector<MachineState> derivatives(const DynamicModel& model, const DynamicState& state,
                                      const SimConfig& cfg) {
    std::vector<MachineState> f(model.machines.size());
    for (std::size_t m = 0; m < model.machines.size(); ++m) {
        const auto& mc = model.machines[m];
        if (!mc.online) continue;
        const auto& p = mc.p;
        const auto& x = state.machines[m];
        const Complex i = model.current(m, x, state.v);
        const double pe = (model.emf(m, x) * std::conj(i)).real();
        auto& d = f[m];
        d.delta = kOmegaS * x.dw;
        d.dw = (x.pm - pe - p.d * x.dw) / (2.0 * p.h);
        if (p.classical) continue;
        const Complex idq = i * kJ * std::polar(1.0, -x.delta);
        d.eqp = (x.efd - x.eqp - (p.xd - p.xdp) * idq.real()) / p.td0p;
        d.edp = (-x.edp + (p.xq - p.xdp) * idq.imag()) / p.tq0p;
        d.efd = (p.ka * (mc.vref - std::abs(state.v[mc.bus])) - x.efd) / p.ta;
        if (cfg.limiters && ((x.efd >= p.efd_max && d.efd > 0) || (x.efd <= p.efd_min && d.efd < 0)))
            d.efd = 0.0;
        if (mc.governor() && !cfg.freeze_governors) {
            d.pm = (mc.pref - x.dw / p.r - x.pm) / p.tg;
            if (cfg.limiters &&
                ((x.pm >= p.gate_max && d.pm > 0) || (x.pm <= p.gate_min && d.pm < 0)))
                d.pm = 0.0;
        }
    }
    return f;
}

double max_abs_derivative(const DynamicModel& model, const DynamicState& state,
                          const SimConfig& cfg) {
    double worst = 0.0;
    for (const auto& d : derivatives(model, state, cfg))
        for (double v : {d.delta, d.dw, d.eqp, d.edp, d.efd, d.pm}) worst = std::max(worst, std::abs(v));
    return worst;
}

DynamicState step(const DynamicModel& model, const DynamicState& state, double dt,
                  const SimConfig& cfg, bool* unconverged) {
    const auto f0 = derivatives(model, state, cfg);
    const std::size_t n = state.machines.size();
    auto advance = [&](const std::vector<MachineState>& f1, double w0, double w1) {
        std::vector<MachineState> x(n);
        for (std::size_t m = 0; m < n; ++m) {
            const auto& a = state.machines[m];
            const auto &g0 = f0[m], &g1 = f1[m];
            x[m] = {a.delta + dt * (w0 * g0.delta + w1 * g1.delta),
                    a.dw + dt * (w0 * g0.dw + w1 * g1.dw),
                    a.eqp + dt * (w0 * g0.eqp + w1 * g1.eqp),
                    a.edp + dt * (w0 * g0.edp + w1 * g1.edp),
                    a.efd + dt * (w0 * g0.efd + w1 * g1.efd),
                    a.pm + dt * (w0 * g0.pm + w1 * g1.pm)};
        }
        clamp_limits(model, x, cfg);
        return x;
    };

    DynamicState next;
    next.t = state.t + dt;
    next.machines = advance(f0, 1.0, 0.0);  // explicit predictor
    bool converged = false;
    for (int it = 0; it < cfg.inner_max; ++it) {
        next.v = model.solve_network(next.machines);
        auto x = advance(derivatives(model, next, cfg), 0.5, 0.5);
        double change = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const auto &a = x[m], &b = next.machines[m];
            for (double d : {a.delta - b.delta, a.dw - b.dw, a.eqp - b.eqp, a.edp - b.edp,
                             a.efd - b.efd, a.pm - b.pm})
                change = std::max(change, std::abs(d));
            if (!finite(a)) throw StepError("non-finite machine state", next.t);
        }
        next.machines = std::move(x);
        if (change < cfg.inner_tol) {
            converged = true;
            break;
        }
    }
    next.v = model.solve_network(next.machines);
    for (const auto& v : next.v)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw StepError("network solve produced non-finite voltages", next.t);
    if (unconverged) *unconverged = !converged;
    return next;
}

namespace {

// Per-machine deviation from its island's centre of inertia, radians
// (0 for offline machines).
std::vector<double> coi_deviation(const DynamicModel& model, const DynamicState& state) {
    const std::size_t n = model.machines.size();
    std::vector<double> num(model.net.buses.size(), 0.0), den(model.net.buses.size(), 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        const auto& mc = model.machines[m];
        if (!mc.online) continue;
        auto k = model.island_of_bus[mc.bus];
        double w = mc.p.h * mc.p.mva_base;
        num[k] += w * state.machines[m].delta;
        den[k] += w;
    }
    std::vector<double> dev(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        const auto& mc = model.machines[m];
        if (!mc.online) continue;
        auto k = model.island_of_bus[mc.bus];
        dev[m] = state.machines[m].delta - num[k] / den[k];
    }
    return dev;
}

}  // namespace

std::vector<std::size_t> detect_loss_of_synchronism(const DynamicModel& model,
                                                    const DynamicState& state,
                                                    double threshold_deg) {
    const double thr = threshold_deg * std::numbers::pi / 180.0;
    auto dev = coi_deviation(model, state);
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < dev.size(); ++m)
        if (model.machines[m].online && std::abs(dev[m]) > thr) out.push_back(m);
    return out;
}

TransientResult run_transient(const Network& net, const PowerFlowSolution& pre,
                              const std::vector<BusDemand>& served, const MachineLibrary& lib,
                              const std::vector<Disturbance>& disturbances,
                              const RelaySettings& relays, const SimConfig& cfg) {
    cfg.check();
    auto init = init_from_power_flow(net, pre, served, lib);
    auto& model = init.model;
    auto st = std::move(init.state);
    const std::size_t nb = net.buses.size();

    TransientResult res;
    const auto n_steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    const auto k_dist = static_cast<long>(std::llround(cfg.disturbance_time / cfg.dt));

    std::vector<DistanceRelayState> dist_state(relays.placements.size());
    std::vector<ShedRelayState> ufls_state(nb), uvls_state(nb);
    std::vector<bool> shed_bus(nb, false);
    for (std::size_t i = 0; i < nb; ++i)
        shed_bus[i] = std::abs(model.load_y[i]) > 0 &&
                      (relays.shed_enabled.empty() || relays.shed_enabled[i]);

    // Bus frequency: filtered derivative of the unwrapped voltage angle.
    std::vector<double> last_angle(nb), filt(nb, 0.0), freq(nb, kSystemHz);
    for (std::size_t i = 0; i < nb; ++i) last_angle[i] = std::arg(st.v[i]);
    const double tf = cfg.freq_filter_s;

    auto record = [&](double t) {
        if (!cfg.record) return;
        auto dev = coi_deviation(model, st);
        for (std::size_t m = 0; m < model.machines.size(); ++m) {
            if (!model.machines[m].online) continue;
            int id = static_cast<int>(model.machines[m].gen);
            res.series.push_back({t, "angle_deg", id, dev[m] * 180.0 / std::numbers::pi});
            res.series.push_back({t, "speed_hz", id, kSystemHz * (1.0 + st.machines[m].dw)});
        }
        for (std::size_t i = 0; i < nb; ++i) {
            res.series.push_back({t, "freq_hz", net.buses[i].id, freq[i]});
            res.series.push_back({t, "vm_pu", net.buses[i].id, std::abs(st.v[i])});
        }
    };

    auto trip_machine = [&](std::size_t m, double t, const char* device) {
        model.machines[m].online = false;
        model.net.generators[model.machines[m].gen].status = GenStatus::offline_tripped;
        res.tripped_generators.push_back(model.machines[m].gen);
        res.events.push_back({t, device, gen_name(net, model.machines[m].gen), "tripped"});
    };

    record(0.0);
    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        if (k == k_dist && !disturbances.empty()) {
            for (const auto& d : disturbances) {
                if (d.kind == Disturbance::Kind::trip_generator) {
                    for (std::size_t m = 0; m < model.machines.size(); ++m)
                        if (model.machines[m].gen == d.index && model.machines[m].online) {
                            model.machines[m].online = false;
                            model.net.generators[d.index].status = GenStatus::offline_tripped;
                        }
                    res.events.push_back({t, "disturbance", gen_name(net, d.index), "trip"});
                } else {
                    auto& br = model.net.branches.at(d.index);
                    const bool open = d.kind == Disturbance::Kind::open_branch;
                    br.oper_status = open ? OperStatus::out_of_service : OperStatus::in_service;
                    res.events.push_back({t, "disturbance", branch_name(net, d.index), open ? "open" : "close"});
                }
            }
            model.refactor();
            st.v = model.solve_network(st.machines);
        }

        bool unconverged = false;
        try {
            st = step(model, st, cfg.dt, cfg, &unconverged);
        } catch (const StepError& e) {
            res.diverged = true;
            res.diagnostic = std::string(e.what()) + " at t=" + csv::format(e.time);
            break;
        }
        res.unconverged_steps += unconverged;
        const double tn = static_cast<double>(k + 1) * cfg.dt;
        st.t = tn;

        for (std::size_t i = 0; i < nb; ++i) {
            if (!model.energized[i]) {
                filt[i] = 0.0;
                freq[i] = kSystemHz;
                continue;
            }
            const double a = std::arg(st.v[i]);
            double da = a - last_angle[i];
            da -= 2.0 * std::numbers::pi * std::round(da / (2.0 * std::numbers::pi));
            last_angle[i] = a;
            filt[i] = ((2.0 * tf - cfg.dt) * filt[i] + 2.0 * da) / (2.0 * tf + cfg.dt);
            freq[i] = kSystemHz + filt[i] / (2.0 * std::numbers::pi);
            res.min_frequency_hz = std::min(res.min_frequency_hz, freq[i]);
        }

        bool changed = false;
        if (cfg.protection) {
            for (std::size_t r = 0; r < relays.placements.size(); ++r) {
                const auto& pl = relays.placements[r];
                auto& br = model.net.branches[pl.branch];
                if (!br.in_service()) continue;
                const auto f = net.bus_index(br.from_bus), to = net.bus_index(br.to_bus);
                const auto y = branch_admittance(br);
                const Complex vt = pl.at_from ? st.v[f] : st.v[to];
                const Complex it = pl.at_from ? y.yff * st.v[f] + y.yft * st.v[to]
                                              : y.ytf * st.v[f] + y.ytt * st.v[to];
                auto z = apparent_impedance(vt, it, relays.distance.current_floor);
                auto zone = distance_step(relays.distance, dist_state[r], z,
                                          Complex(br.resistance, br.reactance), cfg.dt);
                if (!zone) continue;
                br.oper_status = OperStatus::out_of_service;
                res.tripped_branches.push_back(pl.branch);
                res.events.push_back({tn, "distance", branch_name(net, pl.branch),
                                      "zone " + std::to_string(*zone) + " at " +
                                          (pl.at_from ? "from" : "to") + " end"});
                changed = true;
            }
            for (std::size_t i = 0; i < nb; ++i) {
                if (!shed_bus[i] || !model.energized[i] || model.load_remaining[i] <= 0) continue;
                auto shed = [&](const SheddingSettings& s, ShedRelayState& rs, double signal,
                                const char* name) {
                    for (const auto& a : shed_step(s, rs, signal, cfg.dt)) {
                        model.load_remaining[i] = apply_shed(model.load_remaining[i], a.fraction, s.base);
                        res.sheds.push_back({tn, i, name, a.stage + 1, a.fraction, model.load_remaining[i]});
                        res.events.push_back({tn, name, "bus " + std::to_string(net.buses[i].id),
                                              "stage " + std::to_string(a.stage + 1) + " shed " +
                                                  csv::format(a.fraction * 100) + "%"});
                        changed = true;
                    }
                };
                shed(relays.ufls, ufls_state[i], freq[i], "ufls");
                shed(relays.uvls, uvls_state[i], std::abs(st.v[i]), "uvls");
            }
        }

        {
            auto dev = coi_deviation(model, st);
            for (std::size_t m = 0; m < dev.size(); ++m)
                res.max_coi_deviation_deg =
                    std::max(res.max_coi_deviation_deg, std::abs(dev[m]) * 180.0 / std::numbers::pi);
        }
        if (cfg.corrective) {
            auto flagged = detect_loss_of_synchronism(model, st, cfg.instability_deg);
            for (auto m : out_of_step_corrective(flagged, true)) {
                trip_machine(m, tn, "out_of_step");
                changed = true;
            }
        }
        if (changed) {
            model.refactor();
            st.v = model.solve_network(st.machines);
        }
        if ((k + 1) % cfg.decimation == 0) record(tn);
    }

    for (auto m : detect_loss_of_synchronism(model, st, cfg.instability_deg))
        res.lost_synchronism.push_back(model.machines[m].gen);
    res.verdict = (res.diverged || !res.lost_synchronism.empty()) ? Verdict::unstable : Verdict::stable;
    res.load_remaining = model.load_remaining;
    for (std::size_t b = 0; b < model.net.branches.size(); ++b) {
        const auto& br = model.net.branches[b];
        if (!br.in_service()) continue;
        const auto f = net.bus_index(br.from_bus), to = net.bus_index(br.to_bus);
        const auto y = branch_admittance(br);
        const Complex sf = st.v[f] * std::conj(y.yff * st.v[f] + y.yft * st.v[to]);
        const Complex stt = st.v[to] * std::conj(y.ytf * st.v[f] + y.ytt * st.v[to]);
        if (std::max(std::abs(sf), std::abs(stt)) * net.base_mva > br.rating_ste * (1 + 1e-9))
            res.ste_overloads.push_back(b);
    }
    res.final_state = std::move(st);
    return res;
}

std::string series_csv(const std::vector<SeriesRow>& rows) {
    std::ostringstream out;
    out << "t,quantity,id,value\n";
    for (const auto& r : rows)
        out << csv::format(r.t) << ',' << r.quantity << ',' << r.id << ',' << csv::format(r.value) << "\n";
    return out.str();
}

}  // namespace gridres
