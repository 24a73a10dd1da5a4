#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridres/fragility.hpp"
#include "gridres/steady_state.hpp"

namespace gridres {

enum class Category { generator_units, generator_capacity, lines_in_service, lines_available, load_served };
inline constexpr std::array<Category, 5> kCategories = {
    Category::generator_units, Category::generator_capacity, Category::lines_in_service,
    Category::lines_available, Category::load_served};

enum class Mode { steady, aggregated };
inline constexpr std::array<Mode, 2> kModes = {Mode::steady, Mode::aggregated};

const char* to_string(Category c);
const char* to_string(Mode m);
Category parse_category(std::string_view s);
Mode parse_mode(std::string_view s);

double indicator(const Indicators& ind, Category c);

/// Hourly R(t) in percent.
struct PerformanceTrace {
    Category category = Category::load_served;
    Mode mode = Mode::steady;
    std::vector<double> values;
};

struct TraceSet {
    std::vector<PerformanceTrace> traces;  // category-major, then mode
    const PerformanceTrace& get(Category c, Mode m) const;
};

/// Steady traces come straight from `steady`. Aggregated traces take the
/// within-hour value from `aggregated[h]` where present (a re-solve with the
/// hour's transient trips and sheds applied), never above the steady value;
/// the next hourly sample is the steady one again.
TraceSet build_traces(const std::vector<Indicators>& steady,
                      const std::vector<std::optional<Indicators>>& aggregated);

struct PhaseOptions {
    double epsilon = 0.1;         // percentage points, return-to-target band
    int sustained_increases = 2;  // non-flat increases that mark restoration start
    double segment_penalty = 10.0;  // per extra segment, in squared percentage points
    int min_segment_hours = 2;
};

struct PhaseTimestamps {
    std::optional<int> t0, t_ee, t_sr, t_r;
    // Irregular polygon states.
    std::optional<int> t_o_sr, t_q_sr, t_io_sr, t_r_s;
    double target = 100.0;  // value recovery is measured against
};

/// Phase timestamps of one trace. t0 is the event start when the first drop
/// falls inside the event window and the last value before the first drop
/// otherwise; t_ee is the event end; t_sr the hour before the first of
/// `sustained_increases` increases after t_ee (flat hours do not break the
/// run, a decrease does; a single step that reaches the target also counts);
/// t_r the first hour after t_sr within epsilon of the pre-event value.
PhaseTimestamps detect_phases(const std::vector<double>& values, EventWindow window,
                              const PhaseOptions& opts = {});

/// Breakpoints (hours) of a least-squares piecewise-linear fit of
/// values[first..last] with a per-segment penalty; includes both ends.
std::vector<int> segment_breakpoints(const std::vector<double>& values, int first, int last,
                                     double penalty, int min_len);

struct ResilienceMetrics {
    std::optional<double> intact_period;      // h
    std::optional<double> disruption_rate;    // %/h, negative for a drop
    std::optional<double> preparation_time;   // h
    std::optional<double> recovery_rate;      // %/h
    std::optional<double> recovery_time;      // h
    std::optional<double> area_under_curve;   // per unit
    std::optional<double> absorption_time;    // h
    bool instantaneous_drop = false;
};

inline constexpr std::array<const char*, 7> kMetricNames = {
    "intact_period", "disruption_rate", "preparation_time", "recovery_rate",
    "recovery_time", "area_under_curve", "absorption_time"};
std::array<std::optional<double>, 7> metric_values(const ResilienceMetrics& m);

/// Mean of R(t)/100 over the horizon by the trapezoid rule on hourly samples.
double area_under_curve(const std::vector<double>& values);

ResilienceMetrics compute_metrics(const std::vector<double>& values, const PhaseTimestamps& stamps);

struct CategoryComparison {
    Category category;
    ResilienceMetrics steady, aggregated;
    std::array<std::optional<double>, 7> delta;  // aggregated - steady
    std::vector<std::pair<int, double>> dips;    // hour, steady - aggregated (> 0)
    std::optional<int> dominant_dip_hour;        // largest contribution to the area delta
};

struct GapSeries {
    std::string name;  // "lines_available-lines_in_service", "generator_capacity-load_served"
    Mode mode;
    std::vector<double> values;
    double max = 0.0, min = 0.0;
    int argmax = 0, argmin = 0;
};

struct ComparisonReport {
    std::vector<CategoryComparison> categories;
    std::vector<GapSeries> gaps;
};

/// Throws InputError when the two sets differ in horizon or categories.
ComparisonReport compare(const TraceSet& traces, EventWindow window, const PhaseOptions& opts = {});

// ---- files ----

std::string trace_csv(const TraceSet& traces);
std::string metrics_csv(const TraceSet& traces, EventWindow window, const PhaseOptions& opts = {});
std::string comparison_csv(const ComparisonReport& report);

/// Reads `hour,category,mode,value` (full trace file) or `hour,value` (a
/// single trace, returned as load_served / steady).
TraceSet parse_trace_csv(std::string_view text);

}  // namespace gridres
