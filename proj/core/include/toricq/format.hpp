#pragma once

#include <cstdio>
#include <string>

namespace toricq {

/// Round-trippable, locale-independent rendering used by every CSV writer.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace toricq
