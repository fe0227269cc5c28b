#pragma once

#include <cstdio>
#include <string>

namespace ultrafun {

/// Locale-independent numeric formatting with 17 significant digits; the
/// common format of every data file the library writes.
inline std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

}  // namespace ultrafun
