#include "gridres/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gridres/network.hpp"

namespace gridres::csv {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

}  // namespace

std::vector<Row> parse(std::string_view text, const std::vector<std::string>& header,
                       std::string_view what) {
    std::vector<Row> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = header.empty();
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        Row row{line_no, {}};
        std::size_t start = 0;
        while (true) {
            auto comma = t.find(',', start);
            row.fields.push_back(trim(std::string_view(t).substr(
                start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!header_seen) {
            bool ok = row.fields.size() == header.size();
            for (std::size_t i = 0; ok && i < header.size(); ++i)
                ok = iequals(row.fields[i], header[i]);
            if (!ok) {
                std::string expect;
                for (const auto& h : header) expect += (expect.empty() ? "" : ",") + h;
                throw InputError(std::string(what) + ": line " + std::to_string(line_no) +
                                 ": expected header '" + expect + "'");
            }
            header_seen = true;
            continue;
        }
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw InputError(std::string(what) + ": missing header");
    return rows;
}

double to_double(const std::string& field, std::size_t line, std::string_view what) {
    double v = 0.0;
    const char* b = field.data();
    const char* e = b + field.size();
    if (!field.empty() && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || field.empty())
        throw InputError(std::string(what) + ": line " + std::to_string(line) +
                         ": expected number, got '" + field + "'");
    return v;
}

long long to_int(const std::string& field, std::size_t line, std::string_view what) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw InputError(std::string(what) + ": line " + std::to_string(line) +
                         ": expected integer, got '" + field + "'");
    return v;
}

std::string format(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << contents;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace gridres::csv
