// gridres command line: full scenario runs plus one-shot power flow,
// transient, metrics, validation and defaults.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridres/case_io.hpp"
#include "gridres/csv.hpp"
#include "gridres/dynamics.hpp"
#include "gridres/fragility.hpp"
#include "gridres/machine.hpp"
#include "gridres/metrics.hpp"
#include "gridres/outputs.hpp"
#include "gridres/power_flow.hpp"
#include "gridres/protection.hpp"
#include "gridres/scenario.hpp"
#include "gridres/steady_state.hpp"

using namespace gridres;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exit codes: 1 runtime failure, 2 usage, 3 validation failure.
int fail(const std::string& kind, const std::string& msg, int code = 1) {
    std::string flat = msg;
    for (auto& c : flat)
        if (c == '\n' || c == '\r') c = ' ';
    std::cerr << "gridres: error: " << kind << ": " << flat << "\n";
    return code;
}

std::string branch_name(const Branch& br) {
    return std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + ":" + br.circuit_id;
}

// FROM-TO[:CKT]; either orientation matches.
std::size_t find_branch(const Network& net, const std::string& spec) {
    auto dash = spec.find('-');
    if (dash == std::string::npos) throw InputError("branch '" + spec + "': expected FROM-TO[:CKT]");
    auto colon = spec.find(':', dash);
    int from = 0, to = 0;
    try {
        from = std::stoi(spec.substr(0, dash));
        to = std::stoi(spec.substr(dash + 1, colon == std::string::npos ? std::string::npos : colon - dash - 1));
    } catch (const std::exception&) {
        throw InputError("branch '" + spec + "': bus ids must be integers");
    }
    const std::string ckt = colon == std::string::npos ? "1" : spec.substr(colon + 1);
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        const bool ends = (br.from_bus == from && br.to_bus == to) || (br.from_bus == to && br.to_bus == from);
        if (ends && br.circuit_id == ckt) return b;
    }
    throw InputError("branch '" + spec + "' not in case");
}

// BUS[:N]: the N-th generator (1-based, default 1) at a bus.
std::size_t find_generator(const Network& net, const std::string& spec) {
    auto colon = spec.find(':');
    int bus = 0, nth = 1;
    try {
        bus = std::stoi(spec.substr(0, colon));
        if (colon != std::string::npos) nth = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw InputError("generator '" + spec + "': expected BUS[:N]");
    }
    int seen = 0;
    for (std::size_t g = 0; g < net.generators.size(); ++g)
        if (net.generators[g].bus == bus && ++seen == nth) return g;
    throw InputError("generator '" + spec + "' not in case");
}

LoadProfile profile_for(const std::string& path, std::size_t hours) {
    return path.empty() ? LoadProfile::rts_winter(hours) : parse_load_profile(csv::read_file(path));
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
    ScenarioConfig cfg;
    std::string mode = "aggregated";
    std::optional<double> mttr_tower;
    bool no_plots = false, no_series = false, serial = false, no_ste = false;
};

int cmd_run(RunArgs& a) {
    auto& cfg = a.cfg;
    cfg.mode = a.mode == "steady-only" ? RunMode::steady_only : RunMode::aggregated;
    if (a.mttr_tower) {
        const bool det = cfg.repair.deterministic, blocked = cfg.repair.repair_blocked_during_event;
        cfg.repair = RepairParams::from_tower_mttr(*a.mttr_tower);
        cfg.repair.deterministic = det;
        cfg.repair.repair_blocked_during_event = blocked;
    }
    cfg.plots = !a.no_plots;
    cfg.series = !a.no_series;
    cfg.trip_ste_overloads = !a.no_ste;
    auto in = load_inputs(cfg);
    auto report = run_scenario(cfg, in, a.serial ? Execution::serial : Execution::parallel);
    emit_outputs(report, in.net, cfg.output_dir, OutputOptions{cfg.plots, cfg.series});

    int failed = 0;
    for (const auto& r : report.replicas) {
        std::ostringstream line;
        line << "replica " << r.index << " seed " << r.seed;
        if (!r.error.empty()) {
            ++failed;
            line << " error: " << r.error;
        } else {
            const auto& st = r.traces.get(Category::load_served, Mode::steady).values;
            const auto& ag = r.traces.get(Category::load_served, Mode::aggregated).values;
            line << " failures " << r.timeline.records.size() << " transients " << r.transients.size()
                 << " load_served_auc steady " << csv::format(area_under_curve(st)) << " aggregated "
                 << csv::format(area_under_curve(ag));
        }
        std::cout << line.str() << "\n";
    }
    std::cout << "wrote " << cfg.output_dir << " (" << report.replicas.size() << " replicas, "
              << csv::format(report.wall_seconds) << " s)\n";
    if (failed == static_cast<int>(report.replicas.size()))
        return fail("run", "all replicas failed");
    return 0;
}

// ---- powerflow ---------------------------------------------------------------

struct PowerFlowArgs {
    std::string case_path = "rts96";
    std::string load_profile;
    int hour = -1;  // -1: nominal (peak) load
    bool shed = false;
};

int cmd_powerflow(const PowerFlowArgs& a) {
    auto net = load_case(a.case_path);
    const std::size_t hour = a.hour < 0 ? 0 : static_cast<std::size_t>(a.hour);
    auto profile = a.hour < 0 ? LoadProfile::flat(1) : profile_for(a.load_profile, hour + 1);
    if (hour >= profile.size()) throw InputError("hour beyond the load profile");

    PowerFlowSolution sol;
    double shed_mw = 0.0;
    if (a.shed) {
        auto rec = hourly_steady_state(net, profile, hour);
        sol = rec.plan.solution;
        shed_mw = rec.plan.shed_mw;
        net = rec.state;
    } else {
        std::vector<double> dispatch;
        for (const auto& g : net.generators) dispatch.push_back(g.online() ? g.p_set : 0.0);
        sol = run_power_flow(net, scheduled_load(net, profile, hour), dispatch);
    }

    std::cout << "# gridres-powerflow 1\n";
    std::cout << "# converged " << (sol.converged ? 1 : 0) << " iterations " << sol.iterations
              << " max_mismatch_pu " << csv::format(sol.max_mismatch) << " losses_mw "
              << csv::format(sol.losses_mw) << " shed_mw " << csv::format(shed_mw) << "\n";
    for (const auto& is : sol.islands)
        if (!is.error.empty())
            std::cout << "# island " << is.island << ": " << is.error << "\n";
    std::cout << "kind,id,a,b\n";
    for (std::size_t i = 0; i < net.buses.size(); ++i)
        std::cout << "bus," << net.buses[i].id << ',' << csv::format(sol.vm[i]) << ','
                  << csv::format(sol.va[i] * 180.0 / kPi) << "\n";
    for (std::size_t b = 0; b < net.branches.size() && b < sol.flows.size(); ++b)
        std::cout << "branch," << branch_name(net.branches[b]) << ',' << csv::format(sol.flows[b].p_from)
                  << ',' << csv::format(sol.flows[b].q_from) << "\n";
    return sol.converged ? 0 : fail("powerflow", "did not converge");
}

// ---- transient ---------------------------------------------------------------

struct TransientArgs {
    std::string case_path = "rts96";
    std::string machines, relays, load_profile, series_out;
    std::vector<std::string> open, close, trip_gen;
    int hour = -1;
    bool corrective = false, no_protection = false;
    double t_end = 15.0, dt = 1.0 / 120.0;
};

int cmd_transient(const TransientArgs& a) {
    auto net = load_case(a.case_path);
    const std::size_t hour = a.hour < 0 ? 0 : static_cast<std::size_t>(a.hour);
    auto profile = a.hour < 0 ? LoadProfile::flat(1) : profile_for(a.load_profile, hour + 1);
    if (hour >= profile.size()) throw InputError("hour beyond the load profile");
    auto machines = a.machines.empty() ? MachineLibrary::defaults() : parse_machine_csv(csv::read_file(a.machines));
    auto relays = a.relays.empty() ? RelaySettings::defaults(net)
                                   : parse_relay_settings(csv::read_file(a.relays), net);

    std::vector<Disturbance> dist;
    for (const auto& s : a.open) dist.push_back({Disturbance::Kind::open_branch, find_branch(net, s)});
    for (const auto& s : a.close) dist.push_back({Disturbance::Kind::close_branch, find_branch(net, s)});
    for (const auto& s : a.trip_gen) dist.push_back({Disturbance::Kind::trip_generator, find_generator(net, s)});
    if (dist.empty()) throw InputError("no disturbance given (--open, --close or --trip-gen)");

    SimConfig sim;
    sim.corrective = a.corrective;
    sim.protection = !a.no_protection;
    sim.t_end = a.t_end;
    sim.dt = a.dt;
    sim.record = !a.series_out.empty();
    sim.check();

    auto st = study_disturbance(net, profile, hour, dist, machines, relays, sim);
    const auto& tr = st.transient;
    std::cout << "verdict " << to_string(tr.verdict) << "\n";
    std::cout << "max_coi_deviation_deg " << csv::format(tr.max_coi_deviation_deg) << "\n";
    std::cout << "min_frequency_hz " << csv::format(tr.min_frequency_hz) << "\n";
    std::cout << "lost_synchronism " << tr.lost_synchronism.size() << "\n";
    std::cout << "tripped_branches";
    for (auto b : tr.tripped_branches) std::cout << ' ' << branch_name(net.branches[b]);
    std::cout << "\ntripped_generators " << tr.tripped_generators.size() << "\n";
    if (!tr.diagnostic.empty()) std::cout << "diagnostic " << tr.diagnostic << "\n";
    std::cout << "load_served_pre " << csv::format(st.pre.indicators.load_served) << "\n";
    std::cout << "load_served_steady " << csv::format(st.steady.indicators.load_served) << "\n";
    std::cout << "load_served_aggregated " << csv::format(st.aggregated.indicators.load_served) << "\n";
    std::cout << "generators_online_aggregated " << csv::format(st.aggregated.indicators.generator_units) << "\n";
    std::cout << "events\n";
    for (const auto& e : tr.events)
        std::cout << "  " << csv::format(e.t) << ' ' << e.device << ' ' << e.target << ' ' << e.detail << "\n";
    if (!a.series_out.empty()) csv::write_file(a.series_out, series_csv(tr.series));
    return 0;
}

// ---- metrics / validate / defaults ------------------------------------------

struct MetricsArgs {
    std::string trace;
    EventWindow window;
    bool compare = false;
};

int cmd_metrics(const MetricsArgs& a) {
    auto traces = parse_trace_csv(csv::read_file(a.trace));
    if (a.compare) {
        std::cout << comparison_csv(compare(traces, a.window));
        return 0;
    }
    std::cout << metrics_csv(traces, a.window);
    return 0;
}

int cmd_validate(const std::string& path) {
    auto net = load_case(path);
    auto report = validate(net);
    if (report.ok()) {
        std::cout << "ok " << net.name << ": " << net.buses.size() << " buses, " << net.generators.size()
                  << " generators, " << net.line_count() << " lines, " << net.transformer_count()
                  << " transformers, " << net.load_bus_count() << " load buses, p_max "
                  << csv::format(net.total_p_max()) << " MW\n";
        return 0;
    }
    for (const auto& v : report.violations)
        std::cout << v.kind << "," << v.element << "," << v.detail << "\n";
    return fail("validate", std::to_string(report.violations.size()) + " violation(s) in " + path, 3);
}

int cmd_defaults(const std::string& what, const std::string& case_path) {
    if (what == "relays" || what == "all") {
        auto net = load_case(case_path);
        std::cout << write_relay_settings(RelaySettings::defaults(net), net);
    }
    if (what == "fragility" || what == "all") {
        auto set = FragilitySet::defaults();
        std::cout << "# normal\n" << write_fragility_csv(set.get(Robustness::normal));
        std::cout << "# more robust\n" << write_fragility_csv(set.get(Robustness::more_robust));
    }
    if (what == "machines" || what == "all") std::cout << write_machine_csv(MachineLibrary::defaults());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridres: hourly steady-state and transient resilience assessment"};
    app.require_subcommand(1);

    RunArgs run;
    run.cfg.output_dir = default_output_root();
    auto* r = app.add_subcommand("run", "full scenario with Monte Carlo replicas");
    r->add_option("--case", run.cfg.case_path, "case file or alias (rts96, two_area)")->capture_default_str();
    r->add_option("--seed", run.cfg.seed, "master seed")->capture_default_str();
    r->add_option("--hours", run.cfg.horizon, "horizon in hours")->capture_default_str();
    r->add_option("--event-start", run.cfg.window.start)->capture_default_str();
    r->add_option("--event-hours", run.cfg.window.duration)->capture_default_str();
    r->add_option("--mode", run.mode)->check(CLI::IsMember({"aggregated", "steady-only"}))->capture_default_str();
    r->add_flag("--corrective", run.cfg.corrective, "out-of-step generator tripping");
    r->add_option("--replicas", run.cfg.replicas)->capture_default_str();
    r->add_option("--out", run.cfg.output_dir, "output directory")->capture_default_str();
    r->add_option("--wind", run.cfg.wind_path, "hourly wind CSV")->check(CLI::ExistingFile);
    r->add_option("--fragility-normal", run.cfg.fragility_normal_path)->check(CLI::ExistingFile);
    r->add_option("--fragility-robust", run.cfg.fragility_robust_path)->check(CLI::ExistingFile);
    r->add_option("--load-profile", run.cfg.load_profile_path)->check(CLI::ExistingFile);
    r->add_option("--machines", run.cfg.machine_path)->check(CLI::ExistingFile);
    r->add_option("--relays", run.cfg.relay_path)->check(CLI::ExistingFile);
    r->add_option("--area", run.cfg.affected_area, "storm-affected area")->capture_default_str();
    r->add_option("--mttr-tower", run.mttr_tower, "tower MTTR in hours (line MTTR is a fifth)");
    r->add_option("--tower-fraction", run.cfg.repair.tower_fraction)->check(CLI::Range(0.0, 1.0));
    r->add_flag("--deterministic-repair", run.cfg.repair.deterministic);
    r->add_flag("!--repair-during-event", run.cfg.repair.repair_blocked_during_event,
                "allow repairs to finish inside the event window");
    r->add_flag("--no-ste-trip", run.no_ste, "keep branches above STE after a transient");
    r->add_option("--decimation", run.cfg.series_decimation, "dynamics series decimation")->capture_default_str();
    r->add_flag("--no-plots", run.no_plots);
    r->add_flag("--no-series", run.no_series);
    r->add_flag("--serial", run.serial, "run replicas one after another");

    PowerFlowArgs pf;
    auto* p = app.add_subcommand("powerflow", "one-shot AC power flow");
    p->add_option("--case", pf.case_path)->capture_default_str();
    p->add_option("--hour", pf.hour, "profile hour (default: nominal peak load)");
    p->add_option("--load-profile", pf.load_profile)->check(CLI::ExistingFile);
    p->add_flag("--shed", pf.shed, "solve the minimum-shed steady state instead of the set-point flow");

    TransientArgs ta;
    auto* t = app.add_subcommand("transient", "one-shot dynamics with a disturbance list");
    t->add_option("--case", ta.case_path)->capture_default_str();
    t->add_option("--open", ta.open, "branch FROM-TO[:CKT] to open")->take_all();
    t->add_option("--close", ta.close, "branch FROM-TO[:CKT] to close")->take_all();
    t->add_option("--trip-gen", ta.trip_gen, "generator BUS[:N] to trip")->take_all();
    t->add_option("--hour", ta.hour, "profile hour (default: nominal peak load)");
    t->add_option("--load-profile", ta.load_profile)->check(CLI::ExistingFile);
    t->add_option("--machines", ta.machines)->check(CLI::ExistingFile);
    t->add_option("--relays", ta.relays)->check(CLI::ExistingFile);
    t->add_flag("--corrective", ta.corrective);
    t->add_flag("--no-protection", ta.no_protection);
    t->add_option("--t-end", ta.t_end)->capture_default_str();
    t->add_option("--dt", ta.dt)->capture_default_str();
    t->add_option("--series", ta.series_out, "write the time series CSV here");

    MetricsArgs ma;
    auto* m = app.add_subcommand("metrics", "resilience metrics of a trace file");
    m->add_option("--trace", ma.trace)->required()->check(CLI::ExistingFile);
    m->add_option("--event-start", ma.window.start)->capture_default_str();
    m->add_option("--event-hours", ma.window.duration)->capture_default_str();
    m->add_flag("--compare", ma.compare, "steady vs aggregated comparison (full trace files)");

    std::string validate_case;
    auto* v = app.add_subcommand("validate", "check a case file");
    v->add_option("--case", validate_case)->required();

    std::string what = "all", defaults_case = "rts96";
    auto* d = app.add_subcommand("defaults", "print built-in relay, fragility and machine data");
    d->add_option("what", what)->check(CLI::IsMember({"all", "relays", "fragility", "machines"}))->capture_default_str();
    d->add_option("--case", defaults_case, "network for relay placements")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what(), 2);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*r) return cmd_run(run);
        if (*p) return cmd_powerflow(pf);
        if (*t) return cmd_transient(ta);
        if (*m) return cmd_metrics(ma);
        if (*v) return cmd_validate(validate_case);
        if (*d) return cmd_defaults(what, defaults_case);
    } catch (const InputError& e) {
        return fail("input", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
