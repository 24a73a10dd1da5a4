#include "gridres/machine.hpp"

#include <sstream>
#include <vector>

#include "gridres/csv.hpp"
#include "gridres/network.hpp"

namespace gridres {

void MachineParams::check() const {
    auto bad = [&](const char* what) {
        throw InputError("machine '" + ref + "': " + what);
    };
    if (!(mva_base > 0)) bad("mva_base must be positive");
    if (!(h > 0)) bad("H must be positive");
    if (d < 0) bad("negative damping");
    if (ra < 0) bad("negative ra");
    if (!(xdp > 0)) bad("x'd must be positive");
    if (classical) return;
    if (xd < xdp || xq < xdp) bad("synchronous reactances must be at least x'd");
    if (!(td0p > 0 && tq0p > 0 && ta > 0)) bad("time constants must be positive");
    if (!(ka > 0)) bad("exciter gain must be positive");
    if (!(efd_min < efd_max)) bad("field limits out of order");
    if (r < 0) bad("negative droop");
    if (r > 0 && !(tg > 0)) bad("governor time constant must be positive");
    if (!(gate_min <= gate_max)) bad("gate limits out of order");
}

namespace {

MachineParams unit(std::string ref, double base, double p_max, double h, double td0p,
                   double tg) {
    MachineParams p;
    p.ref = std::move(ref);
    p.mva_base = base;
    p.h = h;
    p.d = 2.0;
    p.ra = 0.003;
    p.td0p = td0p;
    p.tg = tg;
    p.gate_max = p_max / base;
    return p;
}

}  // namespace

MachineLibrary MachineLibrary::defaults() {
    MachineLibrary lib;
    // ref, MVA base, unit MW, H, T'd0, governor Tg
    lib.set(unit("U12", 15, 12, 2.3, 5.0, 0.3));    // oil/steam
    lib.set(unit("U20", 25, 20, 3.0, 5.0, 0.2));    // combustion turbine
    lib.set(unit("U50", 60, 50, 3.0, 5.0, 1.0));    // hydro
    lib.set(unit("U76", 90, 76, 3.5, 6.0, 0.5));    // coal/steam
    lib.set(unit("U100", 120, 100, 4.0, 6.0, 0.5)); // oil/steam
    lib.set(unit("U155", 180, 155, 4.0, 6.0, 0.5)); // coal/steam
    lib.set(unit("U197", 220, 197, 4.5, 7.0, 0.5)); // oil/steam
    lib.set(unit("U350", 400, 350, 5.0, 7.0, 0.5)); // coal/steam
    lib.set(unit("U400", 450, 400, 5.5, 8.0, 0.5)); // nuclear
    auto sync = unit("SYNC", 200, 0, 1.5, 6.0, 0.5);  // synchronous condenser
    sync.r = 0.0;
    sync.gate_max = 0.0;
    lib.set(sync);
    return lib;
}

const MachineParams& MachineLibrary::get(const std::string& ref) const {
    auto it = table_.find(ref);
    if (it == table_.end()) throw InputError("no machine parameters for '" + ref + "'");
    return it->second;
}

void MachineLibrary::set(MachineParams p) {
    p.check();
    table_[p.ref] = std::move(p);
}

static const std::vector<std::string> kHeader = {
    "machine_ref", "mva_base", "h",  "d",   "ra",      "xd",      "xq",
    "xdp",         "td0p",     "tq0p", "ka", "ta",      "efd_min", "efd_max",
    "r",           "tg",       "gate_min", "gate_max", "classical"};

MachineLibrary parse_machine_csv(std::string_view text) {
    MachineLibrary lib;
    for (const auto& row : csv::parse(text, kHeader, "machines")) {
        if (row.fields.size() != kHeader.size())
            throw InputError("machines: line " + std::to_string(row.line) + ": expected " +
                             std::to_string(kHeader.size()) + " fields");
        auto num = [&](std::size_t i) { return csv::to_double(row.fields[i], row.line, "machines"); };
        MachineParams p;
        p.ref = row.fields[0];
        double* slots[] = {&p.mva_base, &p.h,  &p.d,       &p.ra,      &p.xd, &p.xq,
                           &p.xdp,      &p.td0p, &p.tq0p,  &p.ka,      &p.ta, &p.efd_min,
                           &p.efd_max,  &p.r,  &p.tg,      &p.gate_min, &p.gate_max};
        for (std::size_t i = 0; i < std::size(slots); ++i) *slots[i] = num(i + 1);
        p.classical = num(18) != 0.0;
        try {
            lib.set(std::move(p));
        } catch (const InputError& e) {
            throw InputError("machines: line " + std::to_string(row.line) + ": " + e.what());
        }
    }
    return lib;
}

std::string write_machine_csv(const MachineLibrary& lib) {
    std::ostringstream out;
    for (std::size_t i = 0; i < kHeader.size(); ++i) out << (i ? "," : "") << kHeader[i];
    out << "\n";
    for (const auto& [ref, p] : lib.all()) {
        out << ref;
        for (double v : {p.mva_base, p.h, p.d, p.ra, p.xd, p.xq, p.xdp, p.td0p, p.tq0p, p.ka, p.ta,
                         p.efd_min, p.efd_max, p.r, p.tg, p.gate_min, p.gate_max})
            out << ',' << csv::format(v);
        out << ',' << (p.classical ? 1 : 0) << "\n";
    }
    return out.str();
}

}  // namespace gridres
