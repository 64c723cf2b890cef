#include "quakenum/time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace quakenum {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm; exact for the full int range we use).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);              // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;    // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;             // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);           // [0, 146096]
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);           // [0, 365]
    const unsigned mp = (5 * doy + 2) / 153;                                // [0, 11]
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = yr + (m <= 2);
}

bool is_leap(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

[[noreturn]] void bad(std::string_view text, const char* why) {
    throw std::invalid_argument("bad timestamp \"" + std::string(text) + "\": " + why);
}

// Parses exactly `n` decimal digits starting at text[pos].
unsigned digits(std::string_view text, std::size_t pos, std::size_t n) {
    if (pos + n > text.size()) bad(text, "truncated");
    unsigned value = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') bad(text, "expected digit");
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    return value;
}

}  // namespace

instant_ms parse_instant(std::string_view text) {
    if (text.size() < 10) bad(text, "too short");
    const std::int64_t year = digits(text, 0, 4);
    if (text[4] != '-') bad(text, "expected '-' after year");
    const unsigned month = digits(text, 5, 2);
    if (text[7] != '-') bad(text, "expected '-' after month");
    const unsigned day = digits(text, 8, 2);
    if (month < 1 || month > 12) bad(text, "month out of range");
    if (day < 1 || day > days_in_month(year, month)) bad(text, "day out of range");

    unsigned hour = 0, minute = 0, second = 0, milli = 0;
    std::size_t pos = 10;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
        ++pos;
        hour = digits(text, pos, 2);
        if (pos + 2 >= text.size() || text[pos + 2] != ':') bad(text, "expected ':' after hour");
        minute = digits(text, pos + 3, 2);
        if (pos + 5 >= text.size() || text[pos + 5] != ':') bad(text, "expected ':' after minute");
        second = digits(text, pos + 6, 2);
        pos += 8;
        if (hour > 23 || minute > 59 || second > 59) bad(text, "time of day out of range");
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            std::size_t n = 0;
            unsigned frac = 0;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                if (n < 3) frac = frac * 10 + static_cast<unsigned>(text[pos] - '0');
                ++n;
                ++pos;
            }
            if (n == 0) bad(text, "empty fractional seconds");
            if (n > 9) bad(text, "more than nanosecond precision");
            while (n < 3) {
                frac *= 10;
                ++n;
            }
            milli = frac;
        }
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) bad(text, "trailing characters");

    const std::int64_t days = days_from_civil(year, month, day);
    return days * ms_per_day +
           (static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second) * ms_per_second +
           milli;
}

std::string format_instant(instant_ms t) {
    std::int64_t days = t / ms_per_day;
    std::int64_t rem = t % ms_per_day;
    if (rem < 0) {
        rem += ms_per_day;
        --days;
    }
    std::int64_t year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    const unsigned hour = static_cast<unsigned>(rem / 3'600'000);
    const unsigned minute = static_cast<unsigned>(rem / 60'000 % 60);
    const unsigned second = static_cast<unsigned>(rem / 1000 % 60);
    const unsigned milli = static_cast<unsigned>(rem % 1000);

    char buf[40];
    if (milli == 0) {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02u:%02u:%02uZ",
                      static_cast<long long>(year), month, day, hour, minute, second);
    } else {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02u:%02u:%02u.%03uZ",
                      static_cast<long long>(year), month, day, hour, minute, second, milli);
    }
    return buf;
}

double duration_days(instant_ms start, instant_ms end) {
    return static_cast<double>(end - start) / static_cast<double>(ms_per_day);
}

}  // namespace quakenum
