#pragma once

namespace bke {
inline constexpr const char* kVersion = "0.1.0";
}
