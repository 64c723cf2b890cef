#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace quakenum {

// Instants are integer milliseconds since 1970-01-01T00:00:00Z.
// Leap seconds are ignored throughout the library: a day is exactly 86400 s,
// so interval arithmetic over multi-decade windows stays exact.
using instant_ms = std::int64_t;

inline constexpr std::int64_t ms_per_second = 1000;
inline constexpr std::int64_t ms_per_day = 86'400'000;

// Parses an ISO-8601 UTC timestamp. Accepted forms:
//   YYYY-MM-DD                    (midnight)
//   YYYY-MM-DDTHH:MM:SS           ('T' or ' ' as the separator)
//   YYYY-MM-DDTHH:MM:SS.f...      (1-9 fractional digits, truncated to ms)
// each optionally followed by 'Z'. Offsets other than Z are rejected; the
// catalog format is UTC-only. Throws std::invalid_argument on anything else.
instant_ms parse_instant(std::string_view text);

// Formats as YYYY-MM-DDTHH:MM:SSZ, inserting .mmm only when non-zero.
std::string format_instant(instant_ms t);

// Length of [start, end) in days as a real number.
double duration_days(instant_ms start, instant_ms end);

}  // namespace quakenum
