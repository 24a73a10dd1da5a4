#include "gridres/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "gridres/csv.hpp"

namespace gridres {

namespace fs = std::filesystem;

std::string default_output_root() {
    const char* env = std::getenv("GRIDRES_OUTPUT_ROOT");
    return env && *env ? env : "gridres_out";
}

namespace {

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw InputError("cannot create directory: " + p.string() + " (" + ec.message() + ")");
}

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string disturbance_label(const Disturbance& d, const Network& net) {
    if (d.kind == Disturbance::Kind::trip_generator)
        return "trip gen " + std::to_string(d.index) + " @ " + std::to_string(net.generators[d.index].bus);
    const auto& br = net.branches[d.index];
    return std::string(d.kind == Disturbance::Kind::open_branch ? "open " : "close ") +
           std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + "(" + br.circuit_id + ")";
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string events_csv(const ReplicaReport& rep) {
    auto events = rep.events;
    std::stable_sort(events.begin(), events.end(), [](const LogEvent& a, const LogEvent& b) {
        return a.hour != b.hour ? a.hour < b.hour : a.t < b.t;
    });
    std::ostringstream out;
    out << "# gridres-events 1\nhour,t,device,target,detail\n";
    for (const auto& e : events)
        out << e.hour << ',' << csv::format(e.t) << ',' << quoted(e.device) << ',' << quoted(e.target)
            << ',' << quoted(e.detail) << "\n";
    return out.str();
}

std::string transients_csv(const ReplicaReport& rep, const Network& net) {
    std::ostringstream out;
    out << "# gridres-transients 1\n"
           "hour,ran,verdict,disturbances,branch_trips,generator_trips,shed_events,ste_overloads,"
           "max_coi_deviation_deg,min_frequency_hz,unconverged_steps,note\n";
    for (const auto& ht : rep.transients) {
        std::string dist;
        for (const auto& d : ht.disturbances) dist += (dist.empty() ? "" : "; ") + disturbance_label(d, net);
        const auto& r = ht.result;
        out << ht.hour << ',' << (ht.ran ? 1 : 0) << ',' << (ht.ran ? to_string(r.verdict) : "NA") << ','
            << quoted(dist) << ',' << r.tripped_branches.size() << ',' << r.tripped_generators.size() << ','
            << r.sheds.size() << ',' << r.ste_overloads.size() << ',' << csv::format(r.max_coi_deviation_deg)
            << ',' << csv::format(r.min_frequency_hz) << ',' << r.unconverged_steps << ',' << quoted(ht.note)
            << "\n";
    }
    return out.str();
}

std::string trace_svg(const TraceSet& traces, Category c, EventWindow window) {
    const double W = 720, H = 360, left = 60, right = 20, top = 30, bottom = 45;
    const auto& st = traces.get(c, Mode::steady).values;
    const auto& ag = traces.get(c, Mode::aggregated).values;
    const std::size_t n = st.size();
    double lo = 100.0;
    for (double v : st) lo = std::min(lo, v);
    for (double v : ag) lo = std::min(lo, v);
    lo = std::max(0.0, std::floor(lo / 10.0) * 10.0 - 10.0);
    const double hi = 100.0 + 2.0;
    auto x = [&](double h) { return left + (W - left - right) * (n > 1 ? h / double(n - 1) : 0.0); };
    auto y = [&](double v) { return top + (H - top - bottom) * (hi - v) / (hi - lo); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<rect x=\"" << fmt_fixed(x(window.start), 2) << "\" y=\"" << top << "\" width=\""
        << fmt_fixed(x(window.end()) - x(window.start), 2) << "\" height=\"" << H - top - bottom
        << "\" fill=\"#f3e6d0\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        double v = lo + (100.0 - lo) * k / 5.0;
        out << "<line x1=\"" << left << "\" x2=\"" << W - right << "\" y1=\"" << fmt_fixed(y(v), 2) << "\" y2=\""
            << fmt_fixed(y(v), 2) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << fmt_fixed(y(v) + 4, 2) << "\" text-anchor=\"end\">"
            << fmt_fixed(v, 0) << "</text>\n";
    }
    const std::size_t step = n > 100 ? 50 : 10;
    for (std::size_t h = 0; h < n; h += step)
        out << "<text x=\"" << fmt_fixed(x(double(h)), 2) << "\" y=\"" << H - bottom + 16
            << "\" text-anchor=\"middle\">" << h << "</text>\n";
    out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">hour</text>\n";
    out << "<text x=\"" << left << "\" y=\"18\">" << to_string(c) << " (%)</text>\n";
    auto polyline = [&](const std::vector<double>& v, const char* colour, const char* dash) {
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"" << dash << " points=\"";
        for (std::size_t h = 0; h < v.size(); ++h)
            out << (h ? " " : "") << fmt_fixed(x(double(h)), 2) << ',' << fmt_fixed(y(v[h]), 2);
        out << "\"/>\n";
    };
    polyline(st, "#1f5fa8", "");
    polyline(ag, "#c0392b", " stroke-dasharray=\"4 3\"");
    out << "<text x=\"" << W - right - 150 << "\" y=\"18\" fill=\"#1f5fa8\">steady</text>\n";
    out << "<text x=\"" << W - right - 90 << "\" y=\"18\" fill=\"#c0392b\">aggregated</text>\n";
    out << "</svg>\n";
    return out.str();
}

void emit_replica(const ReplicaReport& rep, const ScenarioConfig& cfg, const Network& net,
                  const std::string& dir, const OutputOptions& opts) {
    const fs::path root(dir);
    ensure_dir(root);
    if (!rep.error.empty()) {
        csv::write_file((root / "error.txt").string(), rep.error + "\n");
        return;
    }
    csv::write_file((root / "trace.csv").string(), trace_csv(rep.traces));
    csv::write_file((root / "metrics.csv").string(), metrics_csv(rep.traces, cfg.window, cfg.phases));
    csv::write_file((root / "comparison.csv").string(), comparison_csv(rep.comparison));
    csv::write_file((root / "events.csv").string(), events_csv(rep));
    csv::write_file((root / "timeline.csv").string(), "# gridres-timeline 1\n" + rep.timeline.to_csv(net));
    csv::write_file((root / "transients.csv").string(), transients_csv(rep, net));
    if (opts.series) {
        ensure_dir(root / "dynamics");
        for (const auto& ht : rep.transients) {
            if (!ht.ran) continue;
            char name[32];
            std::snprintf(name, sizeof name, "hour_%03d.csv", ht.hour);
            csv::write_file((root / "dynamics" / name).string(),
                            "# gridres-series 1\n" + series_csv(ht.result.series));
        }
    }
    if (opts.plots) {
        ensure_dir(root / "plots");
        for (auto c : kCategories)
            csv::write_file((root / "plots" / (std::string(to_string(c)) + ".svg")).string(),
                            trace_svg(rep.traces, c, cfg.window));
    }
}

void emit_outputs(const RunReport& report, const Network& net, const std::string& dir,
                  const OutputOptions& opts) {
    if (report.replicas.empty()) throw InputError("no replicas");
    const fs::path root(dir);
    ensure_dir(root);
    const bool single = report.replicas.size() == 1;

    std::ostringstream summary, timing;
    summary << "# gridres-summary 1\nreplica,seed,status,category,mode,area_under_curve\n";
    timing << "# gridres-timing 1\nreplica,wall_seconds\n";
    for (const auto& rep : report.replicas) {
        char sub[32];
        std::snprintf(sub, sizeof sub, "replica_%03zu", rep.index);
        emit_replica(rep, report.config, net, single ? dir : (root / sub).string(), opts);
        timing << rep.index << ',' << fmt_fixed(rep.wall_seconds, 3) << "\n";
        if (!rep.error.empty()) {
            summary << rep.index << ',' << rep.seed << ",error,NA,NA,NA\n";
            continue;
        }
        for (const auto& tr : rep.traces.traces)
            summary << rep.index << ',' << rep.seed << ",ok," << to_string(tr.category) << ','
                    << to_string(tr.mode) << ',' << csv::format(area_under_curve(tr.values)) << "\n";
    }
    timing << "total," << fmt_fixed(report.wall_seconds, 3) << "\n";
    csv::write_file((root / "summary.csv").string(), summary.str());
    csv::write_file((root / "timing.csv").string(), timing.str());
}

}  // namespace gridres
