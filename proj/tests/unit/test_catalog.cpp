#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "quakenum/catalog.hpp"
#include "quakenum/time.hpp"

namespace qn = quakenum;

namespace {

const char* header = "time,latitude,longitude,depth_km,magnitude,moment_nm\n";

qn::ParseResult parse(const std::string& body) {
    std::istringstream in(std::string(header) + body);
    return qn::parse_catalog(in);
}

qn::Event make_event(qn::instant_ms t, double lat, double lon, double mag) {
    qn::Event e;
    e.time = t;
    e.latitude = lat;
    e.longitude = lon;
    e.magnitude = mag;
    return e;
}

}  // namespace

TEST_CASE("parse_catalog: well-formed rows") {
    const auto r = parse(
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,6.2,\n"
        "2000-01-02T03:04:05.678Z,-12.25,-77.5,,7.1,\n"
        "2000-01-03,0.0,180.0,33.0,,5.011872e+17\n");
    REQUIRE(r.errors.empty());
    REQUIRE(r.events.size() == 3);
    CHECK(r.events[0].time == qn::parse_instant("2000-01-01"));
    CHECK(r.events[0].latitude == 35.5);
    CHECK(r.events[0].longitude == 139.7);
    CHECK(r.events[0].depth_km == 10.0);
    CHECK(r.events[0].magnitude == 6.2);
    CHECK_FALSE(r.events[0].moment_nm.has_value());
    CHECK_FALSE(r.events[1].depth_km.has_value());
    CHECK(r.events[1].time == qn::parse_instant("2000-01-02T03:04:05.678Z"));
    CHECK_FALSE(r.events[2].magnitude.has_value());
    REQUIRE(r.events[2].moment_nm.has_value());
    // moment 5.011872e17 corresponds to magnitude 5.8
    CHECK(r.events[2].effective_magnitude() == doctest::Approx(5.8).epsilon(1e-7));
}

TEST_CASE("parse_catalog: structural failures throw") {
    std::istringstream empty("");
    CHECK_THROWS_AS(qn::parse_catalog(empty), qn::FormatError);
    std::istringstream bad_header("when,lat,lon,depth,mag,moment\n1,2,3,4,5,6\n");
    CHECK_THROWS_AS(qn::parse_catalog(bad_header), qn::FormatError);
    std::istringstream reordered("latitude,time,longitude,depth_km,magnitude,moment_nm\n");
    CHECK_THROWS_AS(qn::parse_catalog(reordered), qn::FormatError);
}

TEST_CASE("parse_catalog: CRLF and blank lines tolerated") {
    const auto r = parse(
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,6.2,\r\n"
        "\r\n"
        "\n"
        "2000-01-02T00:00:00Z,35.5,139.7,10.0,6.2,\n");
    CHECK(r.errors.empty());
    CHECK(r.events.size() == 2);
}

TEST_CASE("parse_catalog: invalid rows collected with 1-based line numbers") {
    const auto r = parse(
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,6.2,\n"   // line 2: good
        "garbage-time,35.5,139.7,10.0,6.2,\n"           // line 3: bad time
        "2000-01-01T00:00:00Z,95.0,139.7,10.0,6.2,\n"   // line 4: latitude > 90
        "2000-01-01T00:00:00Z,35.5,181.0,10.0,6.2,\n"   // line 5: longitude > 180
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,,\n"      // line 6: no magnitude or moment
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,6.2x,\n"  // line 7: trailing junk in number
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,6.2\n"    // line 8: missing column
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,6.2,,extra\n"  // line 9: extra column
        "2000-01-01T00:00:00Z,35.5,139.7,10.0,,-3.0\n"  // line 10: moment <= 0
        "2000-01-02T00:00:00Z,35.5,139.7,,6.0,\n");     // line 11: good
    CHECK(r.events.size() == 2);
    REQUIRE(r.errors.size() == 8);
    std::vector<std::size_t> lines;
    for (const auto& e : r.errors) lines.push_back(e.line);
    CHECK(lines == std::vector<std::size_t>{3, 4, 5, 6, 7, 8, 9, 10});
}

TEST_CASE("moment/magnitude conversions") {
    CHECK(qn::moment_to_magnitude(5.011872e17) == doctest::Approx(5.8).epsilon(1e-7));
    CHECK(qn::magnitude_to_moment(5.8) == doctest::Approx(5.011872e17).epsilon(1e-6));
    for (const double m : {-1.0, 0.0, 4.5, 6.0, 9.2}) {
        CAPTURE(m);
        CHECK(qn::moment_to_magnitude(qn::magnitude_to_moment(m)) ==
              doctest::Approx(m).epsilon(1e-12));
    }
    CHECK_THROWS_AS(qn::moment_to_magnitude(0.0), std::domain_error);
    CHECK_THROWS_AS(qn::moment_to_magnitude(-1e17), std::domain_error);
    // When both fields are present the explicit magnitude wins.
    qn::Event e = make_event(0, 0, 0, 6.0);
    e.moment_nm = qn::magnitude_to_moment(8.0);
    CHECK(e.effective_magnitude() == 6.0);
}

TEST_CASE("Region::contains: closed edges and wraparound") {
    const qn::Region r{10.0, 50.0, 130.0, 170.0};
    CHECK(r.contains(10.0, 130.0));   // corners included
    CHECK(r.contains(50.0, 170.0));
    CHECK(r.contains(30.0, 150.0));
    CHECK_FALSE(r.contains(9.999, 150.0));
    CHECK_FALSE(r.contains(50.001, 150.0));
    CHECK_FALSE(r.contains(30.0, 129.999));
    CHECK_FALSE(r.contains(30.0, 170.001));

    const qn::Region wrap{-10.0, 10.0, 170.0, -170.0};  // crosses the antimeridian
    CHECK(wrap.contains(0.0, 175.0));
    CHECK(wrap.contains(0.0, -175.0));
    CHECK(wrap.contains(0.0, 180.0));
    CHECK(wrap.contains(0.0, -180.0));
    CHECK(wrap.contains(0.0, 170.0));
    CHECK(wrap.contains(0.0, -170.0));
    CHECK_FALSE(wrap.contains(0.0, 0.0));
    CHECK_FALSE(wrap.contains(0.0, 169.999));
    CHECK_FALSE(wrap.contains(0.0, -169.999));
}

TEST_CASE("filter_events: threshold inclusive, window half-open, region closed") {
    std::vector<qn::Event> events;
    events.push_back(make_event(qn::parse_instant("2000-01-01"), 30, 150, 5.0));  // == mt: kept
    events.push_back(make_event(qn::parse_instant("2000-06-01"), 30, 150, 4.999999));
    events.push_back(make_event(qn::parse_instant("2000-06-01"), 30, 150, 6.0));
    events.push_back(make_event(qn::parse_instant("2001-01-01"), 30, 150, 7.0));  // == end: cut
    events.push_back(make_event(qn::parse_instant("1999-12-31T23:59:59.999Z"), 30, 150, 7.0));
    events.push_back(make_event(qn::parse_instant("2000-06-01"), 9.999, 150, 7.0));

    qn::CatalogFilter f;
    f.magnitude_threshold = 5.0;
    f.window = qn::TimeWindow{qn::parse_instant("2000-01-01"), qn::parse_instant("2001-01-01")};
    f.region = qn::Region{10, 50, 130, 170};
    const auto kept = qn::filter_events(events, f);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].time == qn::parse_instant("2000-01-01"));  // order preserved
    CHECK(kept[1].magnitude == 6.0);

    // An empty filter keeps everything.
    const auto all = qn::filter_events(events, qn::CatalogFilter{});
    CHECK(all.size() == events.size());
}

TEST_CASE("filter_events: malformed filters throw") {
    std::vector<qn::Event> events;
    qn::CatalogFilter f;
    f.window = qn::TimeWindow{100, 100};  // start >= end
    CHECK_THROWS_AS(qn::filter_events(events, f), std::invalid_argument);
    f = {};
    f.region = qn::Region{50, 10, 130, 170};  // inverted latitudes
    CHECK_THROWS_AS(qn::filter_events(events, f), std::invalid_argument);
    f = {};
    f.region = qn::Region{10, 50, 130, 181};  // longitude out of range
    CHECK_THROWS_AS(qn::filter_events(events, f), std::invalid_argument);
    f = {};
    f.magnitude_threshold = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(qn::filter_events(events, f), std::invalid_argument);
}

TEST_CASE("bin_counts: hand-checked edges") {
    const qn::TimeWindow w{0, 4000};
    std::vector<qn::Event> events;
    for (const qn::instant_ms t : {0LL, 999LL, 1000LL, 3999LL}) {
        events.push_back(make_event(t, 0, 0, 5.0));
    }
    const qn::CountSeries s = qn::bin_counts(events, w, 4);
    CHECK(s.counts == std::vector<std::int64_t>{2, 1, 0, 1});
    CHECK(s.n_events == 4);
    CHECK(s.interval_days == doctest::Approx(1000.0 / qn::ms_per_day));

    events.push_back(make_event(4000, 0, 0, 5.0));  // == end: out of window
    CHECK_THROWS_AS(qn::bin_counts(events, w, 4), std::invalid_argument);
}

TEST_CASE("bin_counts: refinement consistency (N vs 2N is exact)") {
    std::mt19937_64 gen(99);
    const qn::TimeWindow w{qn::parse_instant("2000-01-01"), qn::parse_instant("2003-01-01")};
    std::uniform_int_distribution<qn::instant_ms> pick(w.start, w.end - 1);
    std::vector<qn::Event> events;
    for (int i = 0; i < 500; ++i) events.push_back(make_event(pick(gen), 0, 0, 5.0));
    for (const std::size_t n : {7u, 13u, 100u}) {
        CAPTURE(n);
        const qn::CountSeries coarse = qn::bin_counts(events, w, n);
        const qn::CountSeries fine = qn::bin_counts(events, w, 2 * n);
        REQUIRE(coarse.counts.size() == n);
        REQUIRE(fine.counts.size() == 2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(coarse.counts[i] == fine.counts[2 * i] + fine.counts[2 * i + 1]);
        }
        std::int64_t total = 0;
        for (const std::int64_t c : coarse.counts) total += c;
        CHECK(total == 500);
        CHECK(coarse.n_events == 500);
    }
}

TEST_CASE("parse_count_series: round trip and validation") {
    std::istringstream good(
        "# produced elsewhere\n"
        "interval_index,count\n"
        "0,5\n"
        "1,0\n"
        "2,12\n");
    const qn::CountSeries s = qn::parse_count_series(good);
    CHECK(s.counts == std::vector<std::int64_t>{5, 0, 12});

    std::istringstream gap("interval_index,count\n0,5\n2,1\n");
    CHECK_THROWS_AS(qn::parse_count_series(gap), qn::FormatError);
    std::istringstream negative("interval_index,count\n0,-1\n");
    CHECK_THROWS_AS(qn::parse_count_series(negative), qn::FormatError);
    std::istringstream bad_header("idx,n\n0,1\n");
    CHECK_THROWS_AS(qn::parse_count_series(bad_header), qn::FormatError);
    std::istringstream none("interval_index,count\n");
    CHECK_THROWS_AS(qn::parse_count_series(none), qn::FormatError);
}

TEST_CASE("read_file_maybe_gz: plain, gzip, and missing files") {
    CHECK_THROWS_AS(qn::read_file_maybe_gz("/nonexistent/path.csv"), qn::FormatError);
    CHECK_THROWS_AS(qn::read_file_maybe_gz("/nonexistent/path.csv.gz"), qn::FormatError);

    const std::filesystem::path tmp =
        std::filesystem::temp_directory_path() / "quakenum_plain_test.csv";
    {
        std::ofstream f(tmp);
        f << "hello,world\n";
    }
    CHECK(qn::read_file_maybe_gz(tmp.string()) == "hello,world\n");
    std::filesystem::remove(tmp);

    // The bundled fixture is gzip-compressed; spot-check its shape.
    const std::string content =
        qn::read_file_maybe_gz(std::string(QUAKENUM_DATA_DIR) + "/synthetic_nbd_catalog.csv.gz");
    CHECK(content.rfind("time,latitude,longitude,depth_km,magnitude,moment_nm\n", 0) == 0);
    const auto parsed = qn::parse_catalog_file(std::string(QUAKENUM_DATA_DIR) +
                                               "/synthetic_nbd_catalog.csv.gz");
    CHECK(parsed.errors.empty());
    CHECK(parsed.events.size() == 11462);
}
