#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quakenum/time.hpp"

namespace quakenum {

// One catalog entry. At least one of {magnitude, moment_nm} is present;
// when both are, the explicit magnitude wins.
struct Event {
    instant_ms time = 0;
    double latitude = 0.0;   // degrees in [-90, 90]
    double longitude = 0.0;  // degrees in [-180, 180]
    std::optional<double> depth_km;
    std::optional<double> magnitude;
    std::optional<double> moment_nm;  // scalar seismic moment, newton-meters

    // The magnitude used for threshold filtering: the explicit field when
    // present, otherwise derived from the seismic moment.
    double effective_magnitude() const;
};

// Half-open time window [start, end).
struct TimeWindow {
    instant_ms start = 0;
    instant_ms end = 0;
};

// Closed latitude/longitude rectangle. lon_min > lon_max selects the
// wraparound band crossing the antimeridian.
struct Region {
    double lat_min = -90.0;
    double lat_max = 90.0;
    double lon_min = -180.0;
    double lon_max = 180.0;

    bool contains(double latitude, double longitude) const;
};

// Filter settings; absent fields filter nothing.
struct CatalogFilter {
    std::optional<double> magnitude_threshold;  // keep events with m >= threshold
    std::optional<TimeWindow> window;           // keep events with start <= t < end
    std::optional<Region> region;
};

// A row that failed validation while parsing (1-based line number).
struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct ParseResult {
    std::vector<Event> events;      // valid rows, in file order
    std::vector<RowError> errors;   // invalid rows, in file order
};

// Structural problems that make a file unusable as a whole (bad header,
// empty input, unreadable file).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical catalog CSV: header
//   time,latitude,longitude,depth_km,magnitude,moment_nm
// with ISO-8601 UTC times; depth/magnitude/moment may be empty, but each row
// needs magnitude or moment. Invalid rows are collected as RowErrors, not
// thrown; callers wanting strict behaviour inspect `errors`.
ParseResult parse_catalog(std::istream& in);

// Reads a file (gzip-decompressing when the name ends in ".gz") and parses it.
ParseResult parse_catalog_file(const std::string& path);

// Whole-file read helper shared by the parsers and the CLI; decompresses
// ".gz" inputs. Throws FormatError when the file cannot be read.
std::string read_file_maybe_gz(const std::string& path);

// Scalar seismic moment (newton-meters) <-> moment magnitude:
//   m = (2/3) log10(M) - 6. Throws std::domain_error for M <= 0.
double moment_to_magnitude(double moment_nm);
double magnitude_to_moment(double magnitude);

// Applies the filter, preserving order. Throws std::invalid_argument when the
// filter itself is malformed (start >= end, inverted latitudes, ...).
std::vector<Event> filter_events(const std::vector<Event>& events, const CatalogFilter& f);

// Event counts over N equal-duration intervals of a half-open window.
struct CountSeries {
    std::vector<std::int64_t> counts;  // length N
    double interval_days = 0.0;        // window length / N, in days
    std::int64_t n_events = 0;         // == sum(counts)
    TimeWindow window;
    std::string source_id;             // provenance label (input path, ...)
    std::string filter_desc;           // human-readable filter echo

    std::size_t n_intervals() const { return counts.size(); }
};

// Bins events (already restricted to the window) into n_intervals equal
// slices; interval i covers [start + i*D/N, start + (i+1)*D/N). The index is
// computed with exact integer arithmetic, so refining N never moves an event
// across a coarser boundary. Throws std::invalid_argument on an event outside
// the window or a degenerate window/N.
CountSeries bin_counts(const std::vector<Event>& events, TimeWindow window,
                       std::size_t n_intervals);

// Reads the two-column count-series CSV written by the CLI (`interval_index,
// count`; '#' comment lines ignored). Indices must be 0..N-1 in order and
// counts non-negative. Throws FormatError on violations.
CountSeries parse_count_series(std::istream& in);

}  // namespace quakenum
