#include "gridres/scenario.hpp"

#include <chrono>

#include "gridres/case_io.hpp"
#include "gridres/csv.hpp"
#include "gridres/rng.hpp"

namespace gridres {

void ScenarioConfig::check() const {
    if (horizon < 2) throw InputError("horizon must be at least 2 hours");
    if (window.start < 0 || window.duration < 1) throw InputError("bad event window");
    if (window.end() > horizon) throw InputError("event window extends past the horizon");
    if (replicas < 1) throw InputError("no replicas");
    if (series_decimation < 1) throw InputError("series decimation must be at least 1");
}

ScenarioInputs load_inputs(const ScenarioConfig& cfg) {
    cfg.check();
    ScenarioInputs in;
    in.net = load_case(cfg.case_path);
    auto report = validate(in.net);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        throw InputError("case fails validation: " + v.kind + " at " + v.element +
                         (report.violations.size() > 1
                              ? " (+" + std::to_string(report.violations.size() - 1) + " more)"
                              : ""));
    }
    const auto horizon = static_cast<std::size_t>(cfg.horizon);
    in.wind = cfg.wind_path.empty()
                  ? WindProfile::storm(horizon, cfg.window, 22.0, 48.0, cfg.affected_area)
                  : parse_wind_csv(csv::read_file(cfg.wind_path), cfg.affected_area);
    if (in.wind.hourly_speed.size() < horizon) in.wind.hourly_speed.resize(horizon, 0.0);
    in.curves = FragilitySet::defaults();
    if (!cfg.fragility_normal_path.empty())
        in.curves.normal = parse_fragility_csv(csv::read_file(cfg.fragility_normal_path), Robustness::normal);
    if (!cfg.fragility_robust_path.empty())
        in.curves.more_robust =
            parse_fragility_csv(csv::read_file(cfg.fragility_robust_path), Robustness::more_robust);
    in.profile = cfg.load_profile_path.empty()
                     ? LoadProfile::rts_winter(horizon)
                     : parse_load_profile(csv::read_file(cfg.load_profile_path));
    if (in.profile.size() < horizon) throw InputError("load profile shorter than the horizon");
    in.machines = cfg.machine_path.empty() ? MachineLibrary::defaults()
                                           : parse_machine_csv(csv::read_file(cfg.machine_path));
    in.relays = cfg.relay_path.empty() ? RelaySettings::defaults(in.net)
                                       : parse_relay_settings(csv::read_file(cfg.relay_path), in.net);
    return in;
}

namespace {

std::string branch_label(const Network& net, std::size_t b) {
    const auto& br = net.branches[b];
    return "branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + " ckt " +
           br.circuit_id;
}

// Warm start from the previous solution when the branch statuses are unchanged.
void warm_start(ShedOptions& opts, const SteadyStateRecord* prev, const Network& now) {
    opts.power_flow.initial_vm.clear();
    opts.power_flow.initial_va.clear();
    if (!prev || !prev->plan.solution.converged) return;
    for (std::size_t b = 0; b < now.branches.size(); ++b)
        if (now.branches[b].oper_status != prev->state.branches[b].oper_status) return;
    opts.power_flow.initial_vm = prev->plan.solution.vm;
    opts.power_flow.initial_va = prev->plan.solution.va;
}

}  // namespace

AppliedTransient apply_transient(const Network& scheduled, const TransientResult& tr,
                                 bool trip_ste_overloads) {
    AppliedTransient out{scheduled, {}, false};
    auto open = [&](std::size_t b) {
        if (!out.net.branches[b].in_service()) return false;
        out.net.branches[b].oper_status = OperStatus::out_of_service;
        out.changed = true;
        return true;
    };
    for (auto b : tr.tripped_branches) open(b);
    if (trip_ste_overloads)
        for (auto b : tr.ste_overloads)
            if (open(b)) out.thermal_trips.push_back(b);
    auto trip_gen = [&](std::size_t g) {
        if (out.net.generators[g].status == GenStatus::offline_tripped) return;
        out.net.generators[g].status = GenStatus::offline_tripped;
        out.changed = true;
    };
    for (auto g : tr.tripped_generators) trip_gen(g);
    if (tr.verdict == Verdict::unstable)
        for (auto g : tr.lost_synchronism) trip_gen(g);
    for (auto& l : out.net.loads) {
        const double rem = tr.load_remaining[out.net.bus_index(l.bus)];
        if (rem < 1.0) {
            l.served_fraction *= rem;
            out.changed = true;
        }
    }
    return out;
}

DisturbanceStudy study_disturbance(const Network& net, const LoadProfile& profile, std::size_t hour,
                                   const std::vector<Disturbance>& disturbances,
                                   const MachineLibrary& machines, const RelaySettings& relays,
                                   const SimConfig& sim, bool trip_ste_overloads) {
    DisturbanceStudy out;
    out.pre = hourly_steady_state(net, profile, hour);
    if (!out.pre.plan.solution.converged)
        throw InputError("pre-disturbance power flow did not converge");
    out.transient = run_transient(out.pre.state, out.pre.plan.solution, out.pre.plan.served, machines,
                                  disturbances, relays, sim);
    Network scheduled = net;
    for (const auto& d : disturbances) {
        if (d.kind == Disturbance::Kind::trip_generator)
            scheduled.generators.at(d.index).status = GenStatus::offline_tripped;
        else
            scheduled.branches.at(d.index).oper_status = d.kind == Disturbance::Kind::open_branch
                                                             ? OperStatus::out_of_service
                                                             : OperStatus::in_service;
    }
    out.steady = hourly_steady_state(scheduled, profile, hour);
    auto applied = apply_transient(scheduled, out.transient, trip_ste_overloads);
    out.aggregated = applied.changed ? hourly_steady_state(applied.net, profile, hour) : out.steady;
    return out;
}

ReplicaReport run_replica(const ScenarioConfig& cfg, const ScenarioInputs& in, std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    ReplicaReport rep;
    rep.index = index;
    rep.seed = replica_seed(cfg.seed, index);
    try {
        RandomSource rng(rep.seed);
        rep.timeline = build_outage_timeline(in.net, in.wind, in.curves, cfg.repair, cfg.window, rng);
        for (const auto& r : rep.timeline.records) {
            rep.events.push_back({r.failure_hour, 0.0, "storm", branch_label(in.net, r.branch),
                                  std::string("failed (") + to_string(r.mode) + ")"});
            if (r.restore_hour < cfg.horizon)
                rep.events.push_back({r.restore_hour, 0.0, "repair", branch_label(in.net, r.branch), "restored"});
        }

        const bool dynamics = cfg.mode == RunMode::aggregated;
        SimConfig sim;
        sim.corrective = cfg.corrective;
        sim.record = cfg.series;
        sim.decimation = cfg.series_decimation;

        // Transient sheds and trips are undone by the next hourly sample, so each
        // transient starts from the previous hour's steady equilibrium.
        std::optional<SteadyStateRecord> prev_steady;
        std::vector<OperStatus> prev_applied;  // scheduled statuses of the previous hour
        for (int h = 0; h < cfg.horizon; ++h) {
            Network hour = in.net;
            for (std::size_t b = 0; b < hour.branches.size(); ++b)
                if (rep.timeline.damaged(b, h)) {
                    hour.branches[b].infra_status = InfraStatus::damaged;
                    hour.branches[b].oper_status = OperStatus::out_of_service;
                }

            ShedOptions opts;
            warm_start(opts, prev_steady ? &*prev_steady : nullptr, hour);
            auto rec = hourly_steady_state(hour, in.profile, static_cast<std::size_t>(h), opts);
            rep.steady.push_back(rec.indicators);
            rep.shed_mw.push_back(rec.plan.shed_mw);
            rep.aggregated.emplace_back();

            std::vector<OperStatus> applied;
            for (const auto& br : hour.branches) applied.push_back(br.oper_status);

            std::optional<SteadyStateRecord> agg;
            if (dynamics && prev_steady) {
                HourTransient ht;
                ht.hour = h;
                for (std::size_t b = 0; b < applied.size(); ++b) {
                    if (applied[b] == prev_applied[b]) continue;
                    ht.disturbances.push_back({applied[b] == OperStatus::out_of_service
                                                   ? Disturbance::Kind::open_branch
                                                   : Disturbance::Kind::close_branch,
                                               b});
                }
                if (!ht.disturbances.empty()) {
                    try {
                        ht.result = run_transient(prev_steady->state, prev_steady->plan.solution,
                                                  prev_steady->plan.served, in.machines, ht.disturbances,
                                                  in.relays, sim);
                        ht.ran = true;
                        ht.note = ht.result.diagnostic;
                    } catch (const InputError& e) {
                        ht.note = e.what();
                    }
                }
                if (ht.ran) {
                    const auto& tr = ht.result;
                    for (const auto& e : tr.events)
                        rep.events.push_back({h, e.t, e.device, e.target, e.detail});
                    auto applied_tr = apply_transient(hour, tr, cfg.trip_ste_overloads);
                    for (auto b : applied_tr.thermal_trips)
                        rep.events.push_back({h, sim.t_end, "thermal", branch_label(in.net, b), "opened"});
                    if (applied_tr.changed) {
                        agg = hourly_steady_state(applied_tr.net, in.profile, static_cast<std::size_t>(h));
                        ht.aggregated = agg->indicators;
                        rep.aggregated.back() = agg->indicators;
                    }
                    if (!cfg.series) ht.result.series.clear();
                }
                if (!ht.disturbances.empty()) rep.transients.push_back(std::move(ht));
            }

            prev_applied = std::move(applied);
            prev_steady = std::move(rec);
        }

        rep.traces = build_traces(rep.steady, rep.aggregated);
        rep.comparison = compare(rep.traces, cfg.window, cfg.phases);
    } catch (const std::exception& e) {
        rep.error = e.what();
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

RunReport run_scenario(const ScenarioConfig& cfg, const ScenarioInputs& in, Execution exec) {
    cfg.check();
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.config = cfg;
    const auto n = static_cast<std::size_t>(cfg.replicas);
    report.replicas.resize(n);
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) report.replicas[i] = run_replica(cfg, in, i);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t i = 0; i < n; ++i) report.replicas[i] = run_replica(cfg, in, i);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace gridres
