#pragma once

namespace cacsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cacsim
