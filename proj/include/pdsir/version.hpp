#pragma once

namespace pdsir {
inline constexpr const char* kVersion = "0.1.0";
}
