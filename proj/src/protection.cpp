#include "gridres/protection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gridres/csv.hpp"

namespace gridres {

void DistanceRelaySettings::check() const {
    if (zones.empty()) throw InputError("distance relay: no zones");
    for (std::size_t k = 0; k < zones.size(); ++k) {
        if (!(zones[k].reach > 0) || zones[k].delay_cycles < 0)
            throw InputError("distance relay: zone " + std::to_string(k + 1) + " invalid");
        if (k > 0 && !(zones[k].reach > zones[k - 1].reach))
            throw InputError("distance relay: reaches must strictly increase");
        if (k > 0 && zones[k].delay_cycles < zones[k - 1].delay_cycles)
            throw InputError("distance relay: delays must not decrease");
    }
    if (!(current_floor > 0)) throw InputError("distance relay: current floor must be positive");
}

std::optional<Complex> apparent_impedance(Complex v, Complex i, double current_floor) {
    if (!(std::abs(i) > current_floor)) return std::nullopt;
    return v / i;
}

bool mho_contains(Complex z, Complex z_line, double reach) {
    const Complex c = 0.5 * reach * z_line;
    return std::abs(z - c) <= std::abs(c) * (1 + 1e-12);
}

std::optional<int> distance_step(const DistanceRelaySettings& s, DistanceRelayState& state,
                                 std::optional<Complex> z, Complex z_line, double dt) {
    if (state.operated) return std::nullopt;
    state.timer.resize(s.zones.size(), -1.0);
    for (std::size_t k = 0; k < s.zones.size(); ++k) {
        if (z && mho_contains(*z, z_line, s.zones[k].reach))
            state.timer[k] = state.timer[k] < 0 ? 0.0 : state.timer[k] + dt;
        else
            state.timer[k] = -1.0;
    }
    for (std::size_t k = 0; k < s.zones.size(); ++k) {
        if (state.timer[k] >= 0 && state.timer[k] >= s.zones[k].delay_s() - kTimeEps) {
            state.operated = true;
            return static_cast<int>(k + 1);
        }
    }
    return std::nullopt;
}

void SheddingSettings::check(std::string_view what) const {
    const std::string w(what);
    double total = 1.0;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        if (!(stages[k].fraction > 0 && stages[k].fraction <= 1))
            throw InputError(w + ": stage " + std::to_string(k + 1) + " fraction outside (0, 1]");
        if (stages[k].pickup_s < 0)
            throw InputError(w + ": negative pickup delay");
        if (k > 0 && !(stages[k].threshold < stages[k - 1].threshold))
            throw InputError(w + ": thresholds must strictly decrease");
        total = base == ShedBase::remaining ? total * (1 - stages[k].fraction)
                                            : total - stages[k].fraction;
    }
    if (total < -1e-12) throw InputError(w + ": cumulative shed exceeds 100%");
    if (breaker_s < 0) throw InputError(w + ": negative breaker delay");
}

SheddingSettings default_ufls() {
    return {{{59.5, 0.10, 0.05}, {59.2, 0.20, 0.05}, {58.8, 0.20, 0.05}}, 0.02,
            ShedBase::remaining};
}

SheddingSettings default_uvls() {
    return {{{0.90, 0.30, 0.75}, {0.85, 0.50, 1.00}}, 0.05, ShedBase::remaining};
}

std::vector<ShedAction> shed_step(const SheddingSettings& s, ShedRelayState& state,
                                  double signal, double dt) {
    std::vector<ShedAction> out;
    state.stages.resize(s.stages.size());
    for (std::size_t k = 0; k < s.stages.size(); ++k) {
        auto& st = state.stages[k];
        const auto& cfg = s.stages[k];
        if (st.done) continue;
        if (st.operated) {
            st.breaker_timer += dt;
        } else if (signal < cfg.threshold) {
            if (!st.picked_up) {
                st.picked_up = true;
                st.timer = 0.0;
            } else {
                st.timer += dt;
            }
            if (st.timer >= cfg.pickup_s - kTimeEps) {
                // carry the overshoot so pickup + breaker round up once
                st.operated = true;
                st.breaker_timer = st.timer - cfg.pickup_s;
            }
        } else {
            st.picked_up = false;
            st.timer = 0.0;
        }
        if (st.operated && st.breaker_timer >= s.breaker_s - kTimeEps) {
            st.done = true;
            out.push_back({k, cfg.fraction});
        }
    }
    return out;
}

double apply_shed(double remaining, double fraction, ShedBase base) {
    double r = base == ShedBase::remaining ? remaining * (1 - fraction) : remaining - fraction;
    return std::clamp(r, 0.0, 1.0);
}

std::vector<std::size_t> out_of_step_corrective(const std::vector<std::size_t>& flagged,
                                                bool enabled) {
    return enabled ? flagged : std::vector<std::size_t>{};
}

RelaySettings RelaySettings::defaults(const Network& net) {
    RelaySettings s;
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        const auto& f = net.buses[net.bus_index(br.from_bus)];
        const auto& t = net.buses[net.bus_index(br.to_bus)];
        const bool tie = f.area != t.area;
        const bool ehv = !br.is_transformer && f.base_kv >= 200 && t.base_kv >= 200;
        if (tie || ehv) {
            s.placements.push_back({b, true});
            s.placements.push_back({b, false});
        }
    }
    return s;
}

namespace {

std::map<std::string, std::string> split_sections(std::string_view text) {
    std::map<std::string, std::string> out;
    std::string current;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto a = line.find_first_not_of(" \t\r");
        if (a != std::string::npos && line[a] == '[') {
            auto b = line.find(']', a);
            if (b == std::string::npos) throw InputError("relay settings: bad section line: " + line);
            current = line.substr(a + 1, b - a - 1);
            std::transform(current.begin(), current.end(), current.begin(), ::tolower);
            if (out.count(current)) throw InputError("relay settings: duplicate section [" + current + "]");
            out[current];
            continue;
        }
        if (current.empty()) {
            if (a == std::string::npos || line[a] == '#') continue;
            throw InputError("relay settings: data before the first section");
        }
        out[current] += line + "\n";
    }
    return out;
}

SheddingSettings parse_stages(const std::string& body, const std::string& signal,
                              const std::string& what) {
    SheddingSettings s;
    for (const auto& r : csv::parse(body, {"stage", signal, "shed_pct", "pickup_s"}, what)) {
        if (r.fields.size() != 4)
            throw InputError(what + ": line " + std::to_string(r.line) + ": expected 4 fields");
        s.stages.push_back({csv::to_double(r.fields[1], r.line, what),
                            csv::to_double(r.fields[2], r.line, what) / 100.0,
                            csv::to_double(r.fields[3], r.line, what)});
    }
    return s;
}

}  // namespace

RelaySettings parse_relay_settings(std::string_view text, const Network& net) {
    RelaySettings s = RelaySettings::defaults(net);
    auto sec = split_sections(text);
    for (const auto& [name, body] : sec) {
        if (name == "distance") {
            s.placements.clear();
            for (const auto& r : csv::parse(body, {"from", "to", "ckt", "end"}, "relay distance")) {
                if (r.fields.size() != 4)
                    throw InputError("relay distance: line " + std::to_string(r.line) + ": expected 4 fields");
                int from = static_cast<int>(csv::to_int(r.fields[0], r.line, "relay distance"));
                int to = static_cast<int>(csv::to_int(r.fields[1], r.line, "relay distance"));
                std::optional<std::size_t> hit;
                for (std::size_t b = 0; b < net.branches.size(); ++b) {
                    const auto& br = net.branches[b];
                    if (br.from_bus == from && br.to_bus == to && br.circuit_id == r.fields[2]) hit = b;
                }
                if (!hit)
                    throw InputError("relay distance: line " + std::to_string(r.line) + ": no branch " +
                                     r.fields[0] + "-" + r.fields[1] + " circuit " + r.fields[2]);
                if (r.fields[3] != "from" && r.fields[3] != "to")
                    throw InputError("relay distance: line " + std::to_string(r.line) + ": end must be from or to");
                s.placements.push_back({*hit, r.fields[3] == "from"});
            }
        } else if (name == "zones") {
            s.distance.zones.clear();
            for (const auto& r : csv::parse(body, {"zone", "reach_pct", "delay_cycles"}, "relay zones")) {
                if (r.fields.size() != 3)
                    throw InputError("relay zones: line " + std::to_string(r.line) + ": expected 3 fields");
                s.distance.zones.push_back({csv::to_double(r.fields[1], r.line, "relay zones") / 100.0,
                                            csv::to_double(r.fields[2], r.line, "relay zones")});
            }
        } else if (name == "ufls") {
            auto st = parse_stages(body, "frequency_hz", "relay ufls");
            s.ufls.stages = st.stages;
        } else if (name == "uvls") {
            auto st = parse_stages(body, "voltage_pu", "relay uvls");
            s.uvls.stages = st.stages;
        } else if (name == "breakers") {
            for (const auto& r : csv::parse(body, {"relay", "delay_s"}, "relay breakers")) {
                if (r.fields.size() != 2)
                    throw InputError("relay breakers: line " + std::to_string(r.line) + ": expected 2 fields");
                double v = csv::to_double(r.fields[1], r.line, "relay breakers");
                if (r.fields[0] == "ufls") s.ufls.breaker_s = v;
                else if (r.fields[0] == "uvls") s.uvls.breaker_s = v;
                else throw InputError("relay breakers: unknown relay '" + r.fields[0] + "'");
            }
        } else if (name == "options") {
            for (const auto& r : csv::parse(body, {"key", "value"}, "relay options")) {
                if (r.fields.size() != 2)
                    throw InputError("relay options: line " + std::to_string(r.line) + ": expected 2 fields");
                if (r.fields[0] == "shed_base") {
                    if (r.fields[1] != "remaining" && r.fields[1] != "nominal")
                        throw InputError("relay options: shed_base must be remaining or nominal");
                    auto b = r.fields[1] == "remaining" ? ShedBase::remaining : ShedBase::nominal;
                    s.ufls.base = s.uvls.base = b;
                } else if (r.fields[0] == "current_floor") {
                    s.distance.current_floor = csv::to_double(r.fields[1], r.line, "relay options");
                } else {
                    throw InputError("relay options: unknown key '" + r.fields[0] + "'");
                }
            }
        } else if (name == "shed_disabled") {
            s.shed_enabled.assign(net.buses.size(), true);
            for (const auto& r : csv::parse(body, {"bus"}, "relay shed_disabled")) {
                int id = static_cast<int>(csv::to_int(r.fields.at(0), r.line, "relay shed_disabled"));
                s.shed_enabled[net.bus_index(id)] = false;
            }
        } else {
            throw InputError("relay settings: unknown section [" + name + "]");
        }
    }
    s.distance.check();
    s.ufls.check("relay ufls");
    s.uvls.check("relay uvls");
    return s;
}

std::string write_relay_settings(const RelaySettings& s, const Network& net) {
    std::ostringstream out;
    out << "[distance]\nfrom,to,ckt,end\n";
    for (const auto& p : s.placements) {
        const auto& br = net.branches[p.branch];
        out << br.from_bus << ',' << br.to_bus << ',' << br.circuit_id << ','
            << (p.at_from ? "from" : "to") << "\n";
    }
    out << "\n[zones]\nzone,reach_pct,delay_cycles\n";
    for (std::size_t k = 0; k < s.distance.zones.size(); ++k)
        out << k + 1 << ',' << csv::format(s.distance.zones[k].reach * 100) << ','
            << csv::format(s.distance.zones[k].delay_cycles) << "\n";
    auto stages = [&](const char* name, const char* col, const SheddingSettings& st) {
        out << "\n[" << name << "]\nstage," << col << ",shed_pct,pickup_s\n";
        for (std::size_t k = 0; k < st.stages.size(); ++k)
            out << k + 1 << ',' << csv::format(st.stages[k].threshold) << ','
                << csv::format(st.stages[k].fraction * 100) << ','
                << csv::format(st.stages[k].pickup_s) << "\n";
    };
    stages("ufls", "frequency_hz", s.ufls);
    stages("uvls", "voltage_pu", s.uvls);
    out << "\n[breakers]\nrelay,delay_s\nufls," << csv::format(s.ufls.breaker_s) << "\nuvls,"
        << csv::format(s.uvls.breaker_s) << "\n";
    out << "\n[options]\nkey,value\nshed_base,"
        << (s.ufls.base == ShedBase::remaining ? "remaining" : "nominal") << "\ncurrent_floor,"
        << csv::format(s.distance.current_floor) << "\n";
    if (!s.shed_enabled.empty()) {
        out << "\n[shed_disabled]\nbus\n";
        for (std::size_t i = 0; i < s.shed_enabled.size(); ++i)
            if (!s.shed_enabled[i]) out << net.buses[i].id << "\n";
    }
    return out.str();
}

}  // namespace gridres
