#pragma once

namespace lcmavg {

inline constexpr const char* kEngineVersion = "1.0.0";

}  // namespace lcmavg
