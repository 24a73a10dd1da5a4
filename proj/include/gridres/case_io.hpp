#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridres/network.hpp"

namespace gridres {

/// Case file grammar (whitespace separated, one record per line, `#` starts a
/// comment):
///
///   FORMAT gridres-case 1            optional version header
///   CASE   name base_mva
///   BUS    id area kv kind vset       kind: PQ | PV | SLACK
///   BRANCH from to ckt r x b lte ste xfmr
///                                     ste may be '-' (defaults to 1.2 x lte);
///                                     xfmr: 0 line, 1 transformer, other > 0
///                                     transformer with that off-nominal tap
///   GEN    bus pmin pmax qmin qmax pset machine
///   LOAD   bus p q [served_fraction]
///   SHUNT  bus g_mw b_mvar
///
/// Throws InputError naming the line and field for malformed records,
/// dangling bus references and duplicate ids.
Network parse_case(std::string_view text, std::string_view source = "<memory>");

/// Serializes in the grammar above; parse_case(write_case(n)) == n for any
/// network whose statuses are at their defaults.
std::string write_case(const Network& net);

/// Reads a case from a path. The aliases "rts96" and "two_area" resolve to
/// the data files shipped with the library.
Network load_case(const std::string& path_or_alias);

/// Resolves a shipped data file name against GRIDRES_DATA_DIR.
std::string data_path(std::string_view file);

/// CSV with header `hour,multiplier`; hours must be 0..n-1 in order.
LoadProfile parse_load_profile(std::string_view text);
std::string write_load_profile(const LoadProfile& profile);

struct Violation {
    std::string kind;     // e.g. "zero reactance", "dangling reference"
    std::string element;  // e.g. "branch 101-102(1)"
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Network& net);

}  // namespace gridres
