#pragma once

namespace noisewarp {
inline constexpr const char* kVersion = "1.0.0";
}
