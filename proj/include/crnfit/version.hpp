#pragma once

namespace crnfit {

inline constexpr const char* version = "0.1.0";

} // namespace crnfit
