#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "quakenum/time.hpp"

namespace qn = quakenum;

TEST_CASE("parse_instant: known epochs") {
    CHECK(qn::parse_instant("1970-01-01T00:00:00Z") == 0);
    CHECK(qn::parse_instant("1970-01-01") == 0);
    CHECK(qn::parse_instant("1970-01-02") == qn::ms_per_day);
    CHECK(qn::parse_instant("1969-12-31T23:59:59Z") == -1000);
    // 946684800 is the Unix second count for the 2000 epoch.
    CHECK(qn::parse_instant("2000-01-01T00:00:00Z") == 946684800000LL);
    CHECK(qn::parse_instant("2000-01-01 00:00:00") == 946684800000LL);
}

TEST_CASE("parse_instant: fractional seconds truncate to milliseconds") {
    const qn::instant_ms base = qn::parse_instant("2000-01-01T00:00:00Z");
    CHECK(qn::parse_instant("2000-01-01T00:00:00.123Z") == base + 123);
    CHECK(qn::parse_instant("2000-01-01T00:00:00.1Z") == base + 100);
    CHECK(qn::parse_instant("2000-01-01T00:00:00.12Z") == base + 120);
    CHECK(qn::parse_instant("2000-01-01T00:00:00.1239Z") == base + 123);
    CHECK(qn::parse_instant("2000-01-01T00:00:00.123999999Z") == base + 123);
    CHECK(qn::parse_instant("2000-01-01T00:00:00.000Z") == base);
}

TEST_CASE("parse_instant: leap years") {
    CHECK_NOTHROW(qn::parse_instant("2000-02-29"));   // divisible by 400
    CHECK_NOTHROW(qn::parse_instant("2004-02-29"));
    CHECK_THROWS_AS(qn::parse_instant("1900-02-29"), std::invalid_argument);  // century rule
    CHECK_THROWS_AS(qn::parse_instant("2001-02-29"), std::invalid_argument);
    CHECK(qn::parse_instant("2000-03-01") - qn::parse_instant("2000-02-29") == qn::ms_per_day);
}

TEST_CASE("parse_instant: rejects malformed strings") {
    const std::vector<std::string> bad = {
        "",
        "not a date",
        "2000-13-01",            // month out of range
        "2000-00-01",
        "2000-01-32",            // day out of range
        "2000-01-00",
        "2000-01-01T24:00:00Z",  // hour out of range
        "2000-01-01T00:60:00Z",
        "2000-01-01T00:00:60Z",  // no leap seconds
        "2000-1-01",             // fields must be zero-padded
        "2000-01-1",
        "2000-01-01T00:00Z",     // seconds required when time given
        "2000-01-01T00:00:00ZX", // trailing garbage
        "2000-01-01X00:00:00Z",  // bad separator
        "2000-01-01T00:00:00.Z", // empty fraction
        "2000-01-01T00:00:00.1234567890Z",  // more than 9 fractional digits
        "2000/01/01",
    };
    for (const std::string& s : bad) {
        CAPTURE(s);
        CHECK_THROWS_AS(qn::parse_instant(s), std::invalid_argument);
    }
}

TEST_CASE("format_instant: canonical form, milliseconds only when present") {
    CHECK(qn::format_instant(0) == "1970-01-01T00:00:00Z");
    CHECK(qn::format_instant(946684800000LL) == "2000-01-01T00:00:00Z");
    CHECK(qn::format_instant(946684800123LL) == "2000-01-01T00:00:00.123Z");
    CHECK(qn::format_instant(-1000) == "1969-12-31T23:59:59Z");
    CHECK(qn::format_instant(-1) == "1969-12-31T23:59:59.999Z");
}

TEST_CASE("format/parse round-trip") {
    const std::vector<qn::instant_ms> instants = {
        0, 1, -1, 999, -999, 946684800000LL, 946684800001LL, -62135596800000LL,
        1262304000000LL, 253402300799999LL,
    };
    for (const qn::instant_ms t : instants) {
        CAPTURE(t);
        CHECK(qn::parse_instant(qn::format_instant(t)) == t);
    }
}

TEST_CASE("duration_days") {
    const qn::instant_ms a = qn::parse_instant("2000-01-01");
    const qn::instant_ms b = qn::parse_instant("2010-01-01");
    CHECK(qn::duration_days(a, b) == doctest::Approx(3653.0));  // three leap days
    CHECK(qn::duration_days(a, a + qn::ms_per_day / 2) == doctest::Approx(0.5));
}
