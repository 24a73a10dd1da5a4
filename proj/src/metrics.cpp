#include "gridres/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "gridres/csv.hpp"

namespace gridres {

namespace {

constexpr double kFlat = 1e-9;  // changes below this are "flat"

}  // namespace

const char* to_string(Category c) {
    switch (c) {
        case Category::generator_units: return "generator_units";
        case Category::generator_capacity: return "generator_capacity";
        case Category::lines_in_service: return "lines_in_service";
        case Category::lines_available: return "lines_available";
        case Category::load_served: return "load_served";
    }
    return "?";
}

const char* to_string(Mode m) { return m == Mode::steady ? "steady" : "aggregated"; }

Category parse_category(std::string_view s) {
    for (auto c : kCategories)
        if (s == to_string(c)) return c;
    throw InputError("unknown category '" + std::string(s) + "'");
}

Mode parse_mode(std::string_view s) {
    for (auto m : kModes)
        if (s == to_string(m)) return m;
    throw InputError("unknown mode '" + std::string(s) + "'");
}

double indicator(const Indicators& ind, Category c) {
    switch (c) {
        case Category::generator_units: return ind.generator_units;
        case Category::generator_capacity: return ind.generator_capacity;
        case Category::lines_in_service: return ind.lines_in_service;
        case Category::lines_available: return ind.lines_available;
        case Category::load_served: return ind.load_served;
    }
    return 0.0;
}

const PerformanceTrace& TraceSet::get(Category c, Mode m) const {
    for (const auto& t : traces)
        if (t.category == c && t.mode == m) return t;
    throw InputError(std::string("no trace for ") + to_string(c) + "/" + to_string(m));
}

TraceSet build_traces(const std::vector<Indicators>& steady,
                      const std::vector<std::optional<Indicators>>& aggregated) {
    if (!aggregated.empty() && aggregated.size() != steady.size())
        throw InputError("aggregated records do not span the horizon");
    TraceSet set;
    for (auto c : kCategories) {
        PerformanceTrace s{c, Mode::steady, {}}, a{c, Mode::aggregated, {}};
        for (std::size_t h = 0; h < steady.size(); ++h) {
            double v = indicator(steady[h], c);
            s.values.push_back(v);
            double av = v;
            if (!aggregated.empty() && aggregated[h]) av = std::min(v, indicator(*aggregated[h], c));
            a.values.push_back(av);
        }
        set.traces.push_back(std::move(s));
        set.traces.push_back(std::move(a));
    }
    return set;
}

std::vector<int> segment_breakpoints(const std::vector<double>& values, int first, int last,
                                     double penalty, int min_len) {
    if (last - first < 2 * min_len) return {first, last};
    const int n = last - first + 1;
    // Prefix sums over x = h - first.
    std::vector<double> sx(n + 1, 0), sy(n + 1, 0), sxx(n + 1, 0), sxy(n + 1, 0), syy(n + 1, 0);
    for (int k = 0; k < n; ++k) {
        double x = k, y = values[first + k];
        sx[k + 1] = sx[k] + x;
        sy[k + 1] = sy[k] + y;
        sxx[k + 1] = sxx[k] + x * x;
        sxy[k + 1] = sxy[k] + x * y;
        syy[k + 1] = syy[k] + y * y;
    }
    auto sse = [&](int a, int b) {  // samples a..b inclusive, local indices
        double m = b - a + 1;
        double X = sx[b + 1] - sx[a], Y = sy[b + 1] - sy[a];
        double cxx = sxx[b + 1] - sxx[a] - X * X / m;
        double cxy = sxy[b + 1] - sxy[a] - X * Y / m;
        double cyy = syy[b + 1] - syy[a] - Y * Y / m;
        double r = cxx > 0 ? cyy - cxy * cxy / cxx : cyy;
        return std::max(0.0, r);
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n, inf);
    std::vector<int> prev(n, -1);
    best[0] = 0.0;
    for (int b = min_len; b < n; ++b)
        for (int a = 0; a + min_len <= b; ++a) {
            if (best[a] == inf) continue;
            double c = best[a] + sse(a, b) + penalty;
            if (c < best[b] - 1e-12) {
                best[b] = c;
                prev[b] = a;
            }
        }
    std::vector<int> out;
    for (int b = n - 1; b >= 0; b = prev[b]) {
        out.push_back(first + b);
        if (b == 0) break;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

PhaseTimestamps detect_phases(const std::vector<double>& values, EventWindow window,
                              const PhaseOptions& opts) {
    PhaseTimestamps ps;
    const int n = static_cast<int>(values.size());
    if (n == 0) return ps;
    const int ref_hour = std::clamp(window.start - 1, 0, n - 1);
    const double ref = values[ref_hour];
    ps.target = ref;

    int drop = -1;
    for (int h = 1; h < n; ++h)
        if (values[h] < ref - kFlat) {
            drop = h;
            break;
        }
    if (drop < 0) return ps;
    const int t0 = window.contains(drop) ? window.start : drop - 1;
    const int t_ee = std::clamp(window.end(), t0, n - 1);
    ps.t0 = t0;
    ps.t_ee = t_ee;

    const double goal = ref - opts.epsilon;
    if (values[t_ee] >= goal) {
        ps.t_sr = ps.t_r = t_ee;
    } else {
        for (int h = t_ee; h + 1 < n && !ps.t_sr; ++h) {
            if (!(values[h + 1] > values[h] + kFlat)) continue;
            // Walk forward over flat hours counting increases.
            int ups = 1;
            bool ok = values[h + 1] >= goal;
            double last = values[h + 1];
            for (int j = h + 2; j < n && !ok && ups < opts.sustained_increases; ++j) {
                if (values[j] > last + kFlat) {
                    ++ups;
                    if (values[j] >= goal) ok = true;
                } else if (values[j] < last - kFlat) {
                    break;
                }
                last = values[j];
            }
            if (ok || ups >= opts.sustained_increases) ps.t_sr = h;
        }
        if (ps.t_sr)
            for (int h = *ps.t_sr + 1; h < n; ++h)
                if (values[h] >= goal) {
                    ps.t_r = h;
                    break;
                }
    }

    if (ps.t_r && *ps.t_r > t_ee) {
        auto bp = segment_breakpoints(values, t_ee, *ps.t_r, opts.segment_penalty,
                                      opts.min_segment_hours);
        const double avg = (values[*ps.t_r] - values[t_ee]) / (*ps.t_r - t_ee);
        std::vector<bool> rising;
        for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
            double slope = (values[bp[k + 1]] - values[bp[k]]) / (bp[k + 1] - bp[k]);
            rising.push_back(slope > kFlat && slope > 0.25 * avg);
        }
        std::size_t k = 0;
        while (k < rising.size() && !rising[k]) ++k;
        if (k < rising.size()) {
            ps.t_o_sr = bp[k];
            while (k < rising.size() && rising[k]) ++k;
            if (k < rising.size()) {
                ps.t_q_sr = bp[k];
                while (k < rising.size() && !rising[k]) ++k;
                if (k < rising.size()) ps.t_io_sr = bp[k];
            }
        }
        ps.t_r_s = ps.t_r;
        if (!ps.t_io_sr) ps.t_q_sr.reset();
    }
    return ps;
}

double area_under_curve(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n == 1) return values[0] / 100.0;
    double s = 0.0;
    for (std::size_t h = 0; h + 1 < n; ++h) s += 0.5 * (values[h] + values[h + 1]);
    return s / static_cast<double>(n - 1) / 100.0;
}

ResilienceMetrics compute_metrics(const std::vector<double>& values, const PhaseTimestamps& ps) {
    ResilienceMetrics m;
    const int n = static_cast<int>(values.size());
    m.area_under_curve = area_under_curve(values);
    if (!ps.t0) {
        m.intact_period = n;
        m.disruption_rate = 0.0;
        return m;
    }
    m.intact_period = *ps.t0;
    if (ps.t_ee) {
        const double drop = ps.target - values[*ps.t_ee];
        if (*ps.t_ee == *ps.t0) {
            m.instantaneous_drop = true;
            m.disruption_rate = drop > 0 ? -std::numeric_limits<double>::infinity() : 0.0;
        } else {
            // Degradation over [t0, t_ee] from the pre-event value, negated.
            m.disruption_rate = -drop / (*ps.t_ee - *ps.t0);
        }
    }
    if (ps.t_sr && ps.t_ee) {
        m.preparation_time = *ps.t_sr - *ps.t_ee;
        m.absorption_time = *ps.t_sr - *ps.t0;
    }
    if (ps.t_r && ps.t_sr && ps.t_ee) {
        m.recovery_time = *ps.t_r - *ps.t_sr;
        if (*ps.t_r > *ps.t_sr)
            m.recovery_rate = (values[*ps.t_r] - values[*ps.t_ee]) / (*ps.t_r - *ps.t_sr);
        else
            m.recovery_rate = 0.0;
    }
    return m;
}

std::array<std::optional<double>, 7> metric_values(const ResilienceMetrics& m) {
    return {m.intact_period, m.disruption_rate, m.preparation_time, m.recovery_rate,
            m.recovery_time, m.area_under_curve, m.absorption_time};
}

ComparisonReport compare(const TraceSet& traces, EventWindow window, const PhaseOptions& opts) {
    ComparisonReport rep;
    for (auto c : kCategories) {
        const auto& s = traces.get(c, Mode::steady);
        const auto& a = traces.get(c, Mode::aggregated);
        if (s.values.size() != a.values.size())
            throw InputError(std::string("horizon mismatch for ") + to_string(c));
        CategoryComparison cc;
        cc.category = c;
        cc.steady = compute_metrics(s.values, detect_phases(s.values, window, opts));
        cc.aggregated = compute_metrics(a.values, detect_phases(a.values, window, opts));
        auto sv = metric_values(cc.steady), av = metric_values(cc.aggregated);
        for (std::size_t k = 0; k < sv.size(); ++k)
            if (sv[k] && av[k]) cc.delta[k] = *av[k] - *sv[k];
        const std::size_t n = s.values.size();
        double best = 0.0;
        for (std::size_t h = 0; h < n; ++h) {
            double dip = s.values[h] - a.values[h];
            if (dip <= 0) continue;
            cc.dips.emplace_back(static_cast<int>(h), dip);
            double w = (h == 0 || h + 1 == n) ? 0.5 : 1.0;
            if (w * dip > best) {
                best = w * dip;
                cc.dominant_dip_hour = static_cast<int>(h);
            }
        }
        rep.categories.push_back(std::move(cc));
    }
    auto gap = [&](Category hi, Category lo, Mode m) {
        GapSeries g;
        g.name = std::string(to_string(hi)) + "-" + to_string(lo);
        g.mode = m;
        const auto& a = traces.get(hi, m).values;
        const auto& b = traces.get(lo, m).values;
        for (std::size_t h = 0; h < a.size(); ++h) g.values.push_back(a[h] - b[h]);
        if (!g.values.empty()) {
            auto mx = std::max_element(g.values.begin(), g.values.end());
            auto mn = std::min_element(g.values.begin(), g.values.end());
            g.max = *mx;
            g.min = *mn;
            g.argmax = static_cast<int>(mx - g.values.begin());
            g.argmin = static_cast<int>(mn - g.values.begin());
        }
        rep.gaps.push_back(std::move(g));
    };
    for (auto m : kModes) {
        gap(Category::lines_available, Category::lines_in_service, m);
        gap(Category::generator_capacity, Category::load_served, m);
    }
    return rep;
}

namespace {

std::string num_or_na(const std::optional<double>& v) {
    return v ? csv::format(*v) : std::string("NA");
}

}  // namespace

std::string trace_csv(const TraceSet& traces) {
    std::ostringstream out;
    out << "# gridres-trace 1\nhour,category,mode,value\n";
    for (const auto& t : traces.traces)
        for (std::size_t h = 0; h < t.values.size(); ++h)
            out << h << ',' << to_string(t.category) << ',' << to_string(t.mode) << ','
                << csv::format(t.values[h]) << "\n";
    return out.str();
}

std::string metrics_csv(const TraceSet& traces, EventWindow window, const PhaseOptions& opts) {
    std::ostringstream out;
    out << "# gridres-metrics 1\ncategory,mode,metric,value\n";
    for (const auto& t : traces.traces) {
        auto ps = detect_phases(t.values, window, opts);
        auto vals = metric_values(compute_metrics(t.values, ps));
        for (std::size_t k = 0; k < vals.size(); ++k)
            out << to_string(t.category) << ',' << to_string(t.mode) << ',' << kMetricNames[k] << ','
                << num_or_na(vals[k]) << "\n";
        const std::pair<const char*, std::optional<int>> stamps[] = {
            {"t0", ps.t0},       {"t_ee", ps.t_ee},     {"t_sr", ps.t_sr},
            {"t_r", ps.t_r},     {"t_o_sr", ps.t_o_sr}, {"t_q_sr", ps.t_q_sr},
            {"t_io_sr", ps.t_io_sr}, {"t_r_s", ps.t_r_s}};
        for (const auto& [name, v] : stamps)
            out << to_string(t.category) << ',' << to_string(t.mode) << ',' << name << ','
                << (v ? std::to_string(*v) : std::string("NA")) << "\n";
    }
    return out.str();
}

std::string comparison_csv(const ComparisonReport& report) {
    std::ostringstream out;
    out << "# gridres-comparison 1\nkind,name,key,value\n";
    for (const auto& c : report.categories) {
        for (std::size_t k = 0; k < c.delta.size(); ++k)
            out << "delta," << to_string(c.category) << ',' << kMetricNames[k] << ','
                << num_or_na(c.delta[k]) << "\n";
        for (const auto& [h, d] : c.dips)
            out << "dip," << to_string(c.category) << ',' << h << ',' << csv::format(d) << "\n";
        if (c.dominant_dip_hour)
            out << "dominant_dip," << to_string(c.category) << ",hour," << *c.dominant_dip_hour << "\n";
    }
    for (const auto& g : report.gaps) {
        const std::string name = g.name + "/" + to_string(g.mode);
        for (std::size_t h = 0; h < g.values.size(); ++h)
            out << "gap," << name << ',' << h << ',' << csv::format(g.values[h]) << "\n";
        out << "gap_max," << name << ',' << g.argmax << ',' << csv::format(g.max) << "\n";
        out << "gap_min," << name << ',' << g.argmin << ',' << csv::format(g.min) << "\n";
    }
    return out.str();
}

TraceSet parse_trace_csv(std::string_view text) {
    auto rows = csv::parse(text, {}, "trace");
    if (rows.empty()) throw InputError("trace: empty file");
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), ::tolower);
        return s;
    };
    TraceSet set;
    const auto& head = rows.front().fields;
    if (head.size() == 2 && lower(head[0]) == "hour" && lower(head[1]) == "value") {
        PerformanceTrace t{Category::load_served, Mode::steady, {}};
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.fields.size() != 2)
                throw InputError("trace: line " + std::to_string(r.line) + ": expected 2 fields");
            if (csv::to_int(r.fields[0], r.line, "trace") != static_cast<long long>(t.values.size()))
                throw InputError("trace: line " + std::to_string(r.line) + ": hours must be consecutive from 0");
            t.values.push_back(csv::to_double(r.fields[1], r.line, "trace"));
        }
        set.traces.push_back(std::move(t));
        return set;
    }
    if (head.size() != 4 || lower(head[0]) != "hour" || lower(head[1]) != "category" ||
        lower(head[2]) != "mode" || lower(head[3]) != "value")
        throw InputError("trace: header must be hour,value or hour,category,mode,value");
    std::map<std::pair<Category, Mode>, std::vector<double>> series;
    std::vector<std::pair<Category, Mode>> order;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 4)
            throw InputError("trace: line " + std::to_string(r.line) + ": expected 4 fields");
        auto key = std::make_pair(parse_category(r.fields[1]), parse_mode(r.fields[2]));
        auto& v = series[key];
        if (v.empty()) order.push_back(key);
        if (csv::to_int(r.fields[0], r.line, "trace") != static_cast<long long>(v.size()))
            throw InputError("trace: line " + std::to_string(r.line) + ": gap in hours");
        v.push_back(csv::to_double(r.fields[3], r.line, "trace"));
    }
    for (const auto& k : order) set.traces.push_back({k.first, k.second, series[k]});
    return set;
}

}  // namespace gridres
