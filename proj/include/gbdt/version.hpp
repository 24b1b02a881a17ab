#pragma once

namespace gbdt {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace gbdt
