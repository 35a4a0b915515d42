#pragma once

namespace mgtkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mgtkit
