#pragma once

namespace zeropi {
inline constexpr const char* kVersion = "0.1.0";
}
