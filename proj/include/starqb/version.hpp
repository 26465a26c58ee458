#pragma once

#define STARQB_VERSION_MAJOR 0
#define STARQB_VERSION_MINOR 1
#define STARQB_VERSION_PATCH 0

namespace starqb {

inline constexpr const char* version_string() { return "0.1.0"; }

}  // namespace starqb
