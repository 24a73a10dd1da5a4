#pragma once

#include <map>
#include <string>
#include <string_view>

namespace gridres {

/// Surrogate machine data: two-axis round-rotor generator with x'q = x'd,
/// first-order exciter, first-order droop governor. Per-unit on `mva_base`.
struct MachineParams {
    std::string ref;
    double mva_base = 100.0;
    double h = 3.0;  // s
    double d = 0.0;  // pu torque / pu speed
    double ra = 0.0;
    double xd = 1.8, xq = 1.7, xdp = 0.3;  // x'q taken equal to x'd
    double td0p = 6.0, tq0p = 0.75;        // s
    double ka = 50.0, ta = 0.05;           // exciter
    double efd_min = -5.0, efd_max = 6.0;
    double r = 0.05, tg = 0.5;  // governor; r = 0 disables it
    double gate_min = 0.0, gate_max = 1.0;
    /// Constant E' behind x'd, no exciter or governor.
    bool classical = false;

    /// Throws InputError naming the first broken invariant.
    void check() const;
};

class MachineLibrary {
public:
    /// Stand-in parameters for the RTS-96 unit classes (U12 ... U400, SYNC).
    /// Typical values for each unit type, not data from any utility.
    static MachineLibrary defaults();

    const MachineParams& get(const std::string& ref) const;
    bool contains(const std::string& ref) const { return table_.count(ref) > 0; }
    void set(MachineParams p);
    const std::map<std::string, MachineParams>& all() const { return table_; }

private:
    std::map<std::string, MachineParams> table_;
};

/// CSV keyed by machine_ref, header:
/// machine_ref,mva_base,h,d,ra,xd,xq,xdp,td0p,tq0p,ka,ta,efd_min,efd_max,r,tg,gate_min,gate_max,classical
MachineLibrary parse_machine_csv(std::string_view text);
std::string write_machine_csv(const MachineLibrary& lib);

}  // namespace gridres
