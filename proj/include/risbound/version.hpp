#pragma once

namespace risbound {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace risbound
