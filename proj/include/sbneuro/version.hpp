#pragma once

namespace sbneuro {

inline constexpr const char* k_version = "0.1.0";

} // namespace sbneuro
