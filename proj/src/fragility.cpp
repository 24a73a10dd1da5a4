#include "gridres/fragility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "gridres/csv.hpp"

namespace gridres {

const char* to_string(Robustness r) {
    return r == Robustness::normal ? "normal" : "more-robust";
}

const char* to_string(FailureMode m) { return m == FailureMode::tower ? "tower" : "line"; }

FragilityCurve FragilityCurve::from_points(std::vector<std::pair<double, double>> points,
                                           Robustness cls) {
    if (points.size() < 2) throw InputError("fragility curve needs at least two points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [v, p] = points[i];
        if (!(p >= 0.0 && p <= 1.0))
            throw InputError("fragility curve: probability outside [0, 1] at " +
                             csv::format(v) + " m/s");
        if (v < 0.0) throw InputError("fragility curve: negative wind speed");
        if (i > 0) {
            if (!(v > points[i - 1].first))
                throw InputError("fragility curve: wind speeds must strictly increase");
            if (p < points[i - 1].second)
                throw InputError("fragility curve: probabilities must be non-decreasing");
        }
    }
    if (points.back().second != 1.0)
        throw InputError("fragility curve: probability at v_br must be 1");
    FragilityCurve c;
    c.v_cr = points.front().first;
    c.v_br = points.back().first;
    c.points = std::move(points);
    c.robustness_class = cls;
    return c;
}

double failure_probability(const FragilityCurve& curve, double v) {
    if (v < curve.v_cr) return 0.0;
    if (v > curve.v_br) return 1.0;
    const auto& pts = curve.points;
    auto hi = std::lower_bound(pts.begin(), pts.end(), v,
                               [](const auto& pt, double x) { return pt.first < x; });
    if (hi == pts.begin()) return hi->second;
    if (hi == pts.end()) return pts.back().second;
    auto lo = std::prev(hi);
    double w = (v - lo->first) / (hi->first - lo->first);
    return std::clamp(lo->second + w * (hi->second - lo->second), 0.0, 1.0);
}

FragilityCurve default_curve(Robustness cls) {
    const double shift = cls == Robustness::normal ? 0.0 : 10.0;
    std::vector<std::pair<double, double>> pts = {
        {30, 0.0}, {35, 0.02}, {40, 0.06}, {45, 0.15}, {50, 0.32}, {55, 0.6}, {60, 1.0}};
    for (auto& p : pts) p.first += shift;
    return FragilityCurve::from_points(std::move(pts), cls);
}

FragilityCurve parse_fragility_csv(std::string_view text, Robustness cls) {
    auto rows = csv::parse(text, {"wind_mps", "probability"}, "fragility");
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.fields.size() != 2)
            throw InputError("fragility: line " + std::to_string(r.line) + ": expected 2 fields");
        pts.emplace_back(csv::to_double(r.fields[0], r.line, "fragility"),
                         csv::to_double(r.fields[1], r.line, "fragility"));
    }
    return FragilityCurve::from_points(std::move(pts), cls);
}

std::string write_fragility_csv(const FragilityCurve& curve) {
    std::ostringstream out;
    out << "wind_mps,probability\n";
    for (auto [v, p] : curve.points) out << csv::format(v) << ',' << csv::format(p) << "\n";
    return out.str();
}

FragilitySet FragilitySet::defaults() {
    return {default_curve(Robustness::normal), default_curve(Robustness::more_robust)};
}

const FragilityCurve& FragilitySet::get(Robustness cls) const {
    const auto& c = cls == Robustness::normal ? normal : more_robust;
    if (!c) throw InputError(std::string("missing fragility curve for class ") + to_string(cls));
    return *c;
}

WindProfile WindProfile::storm(std::size_t horizon, EventWindow window, double base_mps,
                               double peak_mps, int area) {
    WindProfile w;
    w.affected_area = area;
    w.hourly_speed.assign(horizon, 0.0);
    for (int h = window.start; h < window.end() && h < static_cast<int>(horizon); ++h) {
        double phase = (h - window.start + 0.5) / window.duration;
        w.hourly_speed[h] = base_mps + (peak_mps - base_mps) * std::sin(std::numbers::pi * phase);
    }
    return w;
}

WindProfile WindProfile::calm(std::size_t horizon, int area) {
    WindProfile w;
    w.affected_area = area;
    w.hourly_speed.assign(horizon, 0.0);
    return w;
}

WindProfile parse_wind_csv(std::string_view text, int affected_area) {
    auto rows = csv::parse(text, {"hour", "speed_mps"}, "wind");
    WindProfile w;
    w.affected_area = affected_area;
    for (const auto& r : rows) {
        if (r.fields.size() != 2)
            throw InputError("wind: line " + std::to_string(r.line) + ": expected 2 fields");
        if (csv::to_int(r.fields[0], r.line, "wind") !=
            static_cast<long long>(w.hourly_speed.size()))
            throw InputError("wind: line " + std::to_string(r.line) +
                             ": hours must be consecutive from 0");
        double v = csv::to_double(r.fields[1], r.line, "wind");
        if (v < 0.0)
            throw InputError("wind: line " + std::to_string(r.line) + ": negative speed");
        w.hourly_speed.push_back(v);
    }
    return w;
}

std::string write_wind_csv(const WindProfile& wind) {
    std::ostringstream out;
    out << "hour,speed_mps\n";
    for (std::size_t h = 0; h < wind.hourly_speed.size(); ++h)
        out << h << ',' << csv::format(wind.hourly_speed[h]) << "\n";
    return out.str();
}

RepairParams RepairParams::from_tower_mttr(double mttr_tower) {
    RepairParams p;
    p.mttr_tower = mttr_tower;
    p.mttr_line = mttr_tower / 5.0;
    return p;
}

SampleOutcome sample_status(double prob, RandomSource& rng) {
    return prob > rng.draw() ? SampleOutcome::fails : SampleOutcome::survives;
}

double sample_repair_duration(FailureMode mode, const RepairParams& params, RandomSource& rng) {
    const double mean = params.mttr(mode);
    return params.deterministic ? mean : rng.exponential(mean);
}

int schedule_repair(int failure_hour, FailureMode mode, const RepairParams& params,
                    int event_end, RandomSource& rng) {
    double duration = sample_repair_duration(mode, params, rng);
    int restore = failure_hour + std::max(1, static_cast<int>(std::ceil(duration)));
    if (params.repair_blocked_during_event) restore = std::max(restore, event_end);
    return restore;
}

bool OutageTimeline::damaged(std::size_t branch, int hour) const {
    for (const auto& r : records)
        if (r.branch == branch && hour >= r.failure_hour && hour < r.restore_hour) return true;
    return false;
}

std::string OutageTimeline::to_csv(const Network& net) const {
    std::ostringstream out;
    out << "branch,from,to,ckt,failure_hour,restore_hour,mode\n";
    for (const auto& r : records) {
        const auto& br = net.branches[r.branch];
        out << r.branch << ',' << br.from_bus << ',' << br.to_bus << ',' << br.circuit_id << ','
            << r.failure_hour << ',' << r.restore_hour << ',' << to_string(r.mode) << "\n";
    }
    return out.str();
}

bool wind_exposed(const Network& net, const Branch& br, int area) {
    if (br.is_transformer) return false;
    return net.buses[net.bus_index(br.from_bus)].area == area &&
           net.buses[net.bus_index(br.to_bus)].area == area;
}

Robustness classify_branch(const Network& net, const Branch& br) {
    double kv = std::min(net.buses[net.bus_index(br.from_bus)].base_kv,
                         net.buses[net.bus_index(br.to_bus)].base_kv);
    return kv < 200.0 ? Robustness::normal : Robustness::more_robust;
}

OutageTimeline build_outage_timeline(const Network& net, const WindProfile& wind,
                                     const FragilitySet& curves, const RepairParams& params,
                                     EventWindow window, RandomSource& rng) {
    if (static_cast<int>(wind.hourly_speed.size()) < window.end())
        throw InputError("wind profile shorter than the event window");

    struct Exposed {
        std::size_t branch;
        const FragilityCurve* curve;
    };
    std::vector<Exposed> exposed;
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        if (!br.in_service() || !br.intact() || !wind_exposed(net, br, wind.affected_area))
            continue;
        exposed.push_back({b, &curves.get(classify_branch(net, br))});
    }

    OutageTimeline tl;
    std::vector<bool> failed(exposed.size(), false);
    for (int h = window.start; h < window.end(); ++h) {
        const double v = wind.hourly_speed[h];
        for (std::size_t k = 0; k < exposed.size(); ++k) {
            if (failed[k]) continue;
            double p = failure_probability(*exposed[k].curve, v);
            if (sample_status(p, rng) == SampleOutcome::survives) continue;
            failed[k] = true;
            auto mode = rng.draw() < params.tower_fraction ? FailureMode::tower : FailureMode::line;
            int restore = schedule_repair(h, mode, params, window.end(), rng);
            tl.records.push_back({exposed[k].branch, h, restore, mode});
        }
    }
    return tl;
}

std::vector<double> mean_failures_per_hour(const Network& net, const WindProfile& wind,
                                           const FragilitySet& curves,
                                           const RepairParams& params, EventWindow window,
                                           std::size_t runs, std::uint64_t master_seed,
                                           Execution exec) {
    const std::size_t hours = static_cast<std::size_t>(window.duration);
    std::vector<long long> counts(hours, 0);
    auto one_run = [&](std::size_t i, std::vector<long long>& acc) {
        RandomSource rng(replica_seed(master_seed, i));
        auto tl = build_outage_timeline(net, wind, curves, params, window, rng);
        for (const auto& r : tl.records) ++acc[r.failure_hour - window.start];
    };
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < runs; ++i) one_run(i, counts);
    } else {
#pragma omp parallel
        {
            std::vector<long long> local(hours, 0);
#pragma omp for schedule(static)
            for (std::size_t i = 0; i < runs; ++i) one_run(i, local);
#pragma omp critical
            for (std::size_t h = 0; h < hours; ++h) counts[h] += local[h];
        }
    }
    std::vector<double> mean(hours);
    for (std::size_t h = 0; h < hours; ++h)
        mean[h] = static_cast<double>(counts[h]) / static_cast<double>(runs);
    return mean;
}

double empirical_failure_rate(double prob, std::size_t n, std::uint64_t seed, Execution exec) {
    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    long long fails = 0;
    auto run_chunk = [&](std::size_t c) {
        RandomSource rng(replica_seed(seed, c));
        const std::size_t m = std::min(chunk, n - c * chunk);
        long long f = 0;
        for (std::size_t i = 0; i < m; ++i) f += sample_status(prob, rng) == SampleOutcome::fails;
        return f;
    };
    if (exec == Execution::serial) {
        for (std::size_t c = 0; c < chunks; ++c) fails += run_chunk(c);
    } else {
#pragma omp parallel for schedule(static) reduction(+ : fails)
        for (std::size_t c = 0; c < chunks; ++c) fails += run_chunk(c);
    }
    return n == 0 ? 0.0 : static_cast<double>(fails) / static_cast<double>(n);
}

}  // namespace gridres
