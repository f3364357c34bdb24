#pragma once

// Text formatting shared by every emitter. Numbers are written in shortest
// round-trip form so CSV and JSON outputs parse back to identical doubles.

#include <string>
#include <string_view>
#include <vector>

namespace mixlab {

/// Shortest representation that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string fmt_num(double x);

/// Inverse of fmt_num. Throws kIo on malformed input.
double parse_num(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace mixlab
