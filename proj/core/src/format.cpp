#include "dsm/format.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "dsm/errors.hpp"

namespace dsm {

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_double(std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size()) {
    throw Error(ErrorKind::InvalidArgument, "not a number: '" + str + "'");
  }
  return v;
}

}  // namespace dsm
