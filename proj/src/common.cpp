#include "elastuq/common.hpp"

#include <cstdio>

namespace elastuq {

std::string format_sci(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

}  // namespace elastuq
