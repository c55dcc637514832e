#pragma once

// Number formatting shared by logs, CSV and JSON output.

#include <string>
#include <string_view>

namespace dsm {

// Shortest decimal that round-trips to the same double.
std::string shortest(double x);
// C99 hexadecimal floating point (%a), bit exact.
std::string hexfloat(double x);
// Accepts both decimal and hexadecimal input; throws InvalidArgument.
double parse_double(std::string_view s);

}  // namespace dsm
