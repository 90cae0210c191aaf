#pragma once

namespace greenfield {

inline constexpr const char* version = "0.1.0";

}  // namespace greenfield
