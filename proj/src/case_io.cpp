#include "gridres/case_io.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "gridres/csv.hpp"

namespace gridres {

namespace {

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

class RecordReader {
public:
    RecordReader(std::vector<std::string> tokens, std::size_t line)
        : tokens_(std::move(tokens)), line_(line) {}

    void expect_count(std::size_t lo, std::size_t hi, const char* layout) const {
        if (tokens_.size() < lo || tokens_.size() > hi)
            fail("expected '" + std::string(layout) + "', got " +
                 std::to_string(tokens_.size() - 1) + " fields");
    }
    std::size_t size() const { return tokens_.size(); }
    const std::string& str(std::size_t i) const { return tokens_.at(i); }

    double num(std::size_t i, const char* field) const {
        try {
            return csv::to_double(tokens_.at(i), line_, "case");
        } catch (const InputError&) {
            fail("field '" + std::string(field) + "': expected number, got '" + tokens_.at(i) +
                 "'");
        }
    }
    int integer(std::size_t i, const char* field) const {
        try {
            return static_cast<int>(csv::to_int(tokens_.at(i), line_, "case"));
        } catch (const InputError&) {
            fail("field '" + std::string(field) + "': expected integer, got '" + tokens_.at(i) +
                 "'");
        }
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("case line " + std::to_string(line_) + ": " + tokens_.at(0) + ": " +
                         msg);
    }
    std::size_t line() const { return line_; }

private:
    std::vector<std::string> tokens_;
    std::size_t line_;
};

BusKind parse_kind(const RecordReader& r, std::size_t i) {
    auto k = upper(r.str(i));
    if (k == "PQ") return BusKind::pq;
    if (k == "PV") return BusKind::pv;
    if (k == "SLACK" || k == "REF") return BusKind::slack;
    r.fail("field 'kind': expected PQ, PV or SLACK, got '" + r.str(i) + "'");
}

const char* kind_name(BusKind k) {
    switch (k) {
        case BusKind::pq: return "PQ";
        case BusKind::pv: return "PV";
        case BusKind::slack: return "SLACK";
    }
    return "PQ";
}

}  // namespace

Network parse_case(std::string_view text, std::string_view source) {
    Network net;
    net.source = std::string(source);
    net.name = "unnamed";
    std::vector<std::pair<std::size_t, int>> bus_refs;  // (line, bus id) to resolve later
    std::set<std::tuple<int, int, std::string>> branch_keys;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> tokens;
        for (std::string t; ls >> t;) tokens.push_back(t);
        if (tokens.empty()) continue;
        RecordReader r(tokens, line_no);
        auto tag = upper(tokens[0]);

        if (tag == "FORMAT") {
            r.expect_count(3, 3, "FORMAT gridres-case version");
            if (r.str(1) != "gridres-case" || r.str(2) != "1")
                r.fail("unsupported format '" + r.str(1) + " " + r.str(2) + "'");
        } else if (tag == "CASE") {
            r.expect_count(3, 3, "CASE name base_mva");
            net.name = r.str(1);
            net.base_mva = r.num(2, "base_mva");
            if (!(net.base_mva > 0)) r.fail("field 'base_mva': must be positive");
        } else if (tag == "BUS") {
            r.expect_count(6, 6, "BUS id area kv kind vset");
            Bus b;
            b.id = r.integer(1, "id");
            b.area = r.integer(2, "area");
            b.base_kv = r.num(3, "kv");
            b.kind = parse_kind(r, 4);
            b.voltage_setpoint = r.num(5, "vset");
            if (net.find_bus(b.id)) r.fail("duplicate bus id " + std::to_string(b.id));
            net.buses.push_back(b);
            net.reindex();
        } else if (tag == "BRANCH") {
            r.expect_count(10, 10, "BRANCH from to ckt r x b lte ste xfmr");
            Branch br;
            br.from_bus = r.integer(1, "from");
            br.to_bus = r.integer(2, "to");
            br.circuit_id = r.str(3);
            br.resistance = r.num(4, "r");
            br.reactance = r.num(5, "x");
            br.charging = r.num(6, "b");
            br.rating_lte = r.num(7, "lte");
            br.rating_ste = r.str(8) == "-" ? 1.2 * br.rating_lte : r.num(8, "ste");
            double xf = r.num(9, "xfmr");
            if (xf < 0) r.fail("field 'xfmr': must be 0, 1 or a positive tap ratio");
            br.is_transformer = xf != 0.0;
            br.tap = (xf == 0.0 || xf == 1.0) ? 1.0 : xf;
            auto key = std::make_tuple(std::min(br.from_bus, br.to_bus),
                                       std::max(br.from_bus, br.to_bus), br.circuit_id);
            if (!branch_keys.insert(key).second)
                r.fail("duplicate branch " + std::to_string(br.from_bus) + "-" +
                       std::to_string(br.to_bus) + " circuit " + br.circuit_id);
            bus_refs.emplace_back(line_no, br.from_bus);
            bus_refs.emplace_back(line_no, br.to_bus);
            net.branches.push_back(br);
        } else if (tag == "GEN") {
            r.expect_count(8, 8, "GEN bus pmin pmax qmin qmax pset machine");
            Generator g;
            g.bus = r.integer(1, "bus");
            g.p_min = r.num(2, "pmin");
            g.p_max = r.num(3, "pmax");
            g.q_min = r.num(4, "qmin");
            g.q_max = r.num(5, "qmax");
            g.p_set = r.num(6, "pset");
            g.machine_ref = r.str(7);
            bus_refs.emplace_back(line_no, g.bus);
            net.generators.push_back(g);
        } else if (tag == "LOAD") {
            r.expect_count(4, 5, "LOAD bus p q [served]");
            Load l;
            l.bus = r.integer(1, "bus");
            l.p_nominal = r.num(2, "p");
            l.q_nominal = r.num(3, "q");
            if (r.size() == 5) l.served_fraction = r.num(4, "served");
            bus_refs.emplace_back(line_no, l.bus);
            net.loads.push_back(l);
        } else if (tag == "SHUNT") {
            r.expect_count(4, 4, "SHUNT bus g_mw b_mvar");
            int id = r.integer(1, "bus");
            auto idx = net.find_bus(id);
            if (!idx) r.fail("dangling reference to bus " + std::to_string(id));
            net.buses[*idx].shunt_g_mw += r.num(2, "g_mw");
            net.buses[*idx].shunt_b_mvar += r.num(3, "b_mvar");
        } else {
            r.fail("unknown record type");
        }
    }
    if (net.buses.empty()) throw InputError("no buses");
    for (const auto& [line, id] : bus_refs)
        if (!net.find_bus(id))
            throw InputError("case line " + std::to_string(line) +
                             ": dangling reference to bus " + std::to_string(id));
    return net;
}

std::string write_case(const Network& net) {
    std::ostringstream out;
    using csv::format;
    out << "FORMAT gridres-case 1\n";
    out << "CASE " << (net.name.empty() ? "unnamed" : net.name) << ' ' << format(net.base_mva)
        << "\n";
    for (const auto& b : net.buses)
        out << "BUS " << b.id << ' ' << b.area << ' ' << format(b.base_kv) << ' '
            << kind_name(b.kind) << ' ' << format(b.voltage_setpoint) << "\n";
    for (const auto& b : net.buses)
        if (b.shunt_g_mw != 0.0 || b.shunt_b_mvar != 0.0)
            out << "SHUNT " << b.id << ' ' << format(b.shunt_g_mw) << ' '
                << format(b.shunt_b_mvar) << "\n";
    for (const auto& br : net.branches) {
        double xf = br.is_transformer ? br.tap : 0.0;
        out << "BRANCH " << br.from_bus << ' ' << br.to_bus << ' ' << br.circuit_id << ' '
            << format(br.resistance) << ' ' << format(br.reactance) << ' '
            << format(br.charging) << ' ' << format(br.rating_lte) << ' '
            << format(br.rating_ste) << ' ' << format(xf) << "\n";
    }
    for (const auto& g : net.generators)
        out << "GEN " << g.bus << ' ' << format(g.p_min) << ' ' << format(g.p_max) << ' '
            << format(g.q_min) << ' ' << format(g.q_max) << ' ' << format(g.p_set) << ' '
            << g.machine_ref << "\n";
    for (const auto& l : net.loads) {
        out << "LOAD " << l.bus << ' ' << format(l.p_nominal) << ' ' << format(l.q_nominal);
        if (l.served_fraction != 1.0) out << ' ' << format(l.served_fraction);
        out << "\n";
    }
    return out.str();
}

std::string data_path(std::string_view file) {
    return std::string(GRIDRES_DATA_DIR) + "/" + std::string(file);
}

Network load_case(const std::string& path_or_alias) {
    std::string path = path_or_alias;
    if (path_or_alias == "rts96") path = data_path("rts96.case");
    else if (path_or_alias == "two_area") path = data_path("two_area.case");
    return parse_case(csv::read_file(path), path);
}

LoadProfile parse_load_profile(std::string_view text) {
    auto rows = csv::parse(text, {"hour", "multiplier"}, "load profile");
    LoadProfile p;
    for (const auto& row : rows) {
        if (row.fields.size() != 2)
            throw InputError("load profile: line " + std::to_string(row.line) +
                             ": expected 2 fields");
        auto hour = csv::to_int(row.fields[0], row.line, "load profile");
        if (hour != static_cast<long long>(p.size()))
            throw InputError("load profile: line " + std::to_string(row.line) +
                             ": hours must be consecutive from 0");
        double m = csv::to_double(row.fields[1], row.line, "load profile");
        if (!(m > 0.0 && m <= 1.0))
            throw InputError("load profile: line " + std::to_string(row.line) +
                             ": multiplier must be in (0, 1]");
        p.hourly_multipliers.push_back(m);
    }
    return p;
}

std::string write_load_profile(const LoadProfile& profile) {
    std::ostringstream out;
    out << "hour,multiplier\n";
    for (std::size_t h = 0; h < profile.size(); ++h)
        out << h << ',' << csv::format(profile.hourly_multipliers[h]) << "\n";
    return out.str();
}

}  // namespace gridres
