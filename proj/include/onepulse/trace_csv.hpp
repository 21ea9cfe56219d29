#pragma once

// Trace CSV: header `delta_t_ps,signal`, one sample per line, LF endings,
// shortest round-trip decimal for every value.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "onepulse/error.hpp"
#include "onepulse/experiment.hpp"
#include "onepulse/format.hpp"

namespace onepulse {

inline constexpr std::string_view trace_csv_header = "delta_t_ps,signal";

inline void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << trace_csv_header << '\n';
    for (const auto& s : trace.samples) os << format_double(s.delta_t_ps) << ',' << format_double(s.signal) << '\n';
}

namespace detail {
inline double parse_csv_number(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error(ErrorKind::parse, "trace csv line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    return v;
}
} // namespace detail

[[nodiscard]] inline Trace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != trace_csv_header)
        throw Error(ErrorKind::parse, "trace csv line 1: expected header '" + std::string(trace_csv_header) + "'");
    Trace trace;
    std::size_t n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw Error(ErrorKind::parse, "trace csv line " + std::to_string(n) + ": expected two fields");
        const std::string_view sv(line);
        trace.samples.push_back(
            {detail::parse_csv_number(sv.substr(0, comma), n), detail::parse_csv_number(sv.substr(comma + 1), n)});
    }
    return trace;
}

[[nodiscard]] inline Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open trace file " + path);
    return read_trace_csv(in);
}

} // namespace onepulse
