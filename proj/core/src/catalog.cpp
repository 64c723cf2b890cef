#include "quakenum/catalog.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace quakenum {
namespace {

constexpr char canonical_header[] = "time,latitude,longitude,depth_km,magnitude,moment_nm";

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t begin = 0;
    for (;;) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(begin));
            return fields;
        }
        fields.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
}

// Parses a complete double field; empty input handled by the caller.
bool parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::optional<std::string> parse_row(const std::string& line, Event& ev) {
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 6) {
        return "expected 6 fields, got " + std::to_string(fields.size());
    }
    try {
        ev.time = parse_instant(fields[0]);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    if (!parse_double(fields[1], ev.latitude)) return "bad latitude \"" + fields[1] + "\"";
    if (ev.latitude < -90.0 || ev.latitude > 90.0) return "latitude out of [-90, 90]";
    if (!parse_double(fields[2], ev.longitude)) return "bad longitude \"" + fields[2] + "\"";
    if (ev.longitude < -180.0 || ev.longitude > 180.0) return "longitude out of [-180, 180]";

    if (!fields[3].empty()) {
        double depth;
        if (!parse_double(fields[3], depth)) return "bad depth_km \"" + fields[3] + "\"";
        if (depth < 0.0) return "depth_km must be >= 0";
        ev.depth_km = depth;
    }
    if (!fields[4].empty()) {
        double magnitude;
        if (!parse_double(fields[4], magnitude)) return "bad magnitude \"" + fields[4] + "\"";
        ev.magnitude = magnitude;
    }
    if (!fields[5].empty()) {
        double moment;
        if (!parse_double(fields[5], moment)) return "bad moment_nm \"" + fields[5] + "\"";
        if (moment <= 0.0) return "moment_nm must be > 0";
        ev.moment_nm = moment;
    }
    if (!ev.magnitude && !ev.moment_nm) return "row has neither magnitude nor moment_nm";
    return std::nullopt;
}

void validate_filter(const CatalogFilter& f) {
    if (f.magnitude_threshold && !std::isfinite(*f.magnitude_threshold)) {
        throw std::invalid_argument("filter: magnitude threshold must be finite");
    }
    if (f.window && !(f.window->start < f.window->end)) {
        throw std::invalid_argument("filter: window start must precede end");
    }
    if (f.region) {
        const Region& r = *f.region;
        if (!(r.lat_min < r.lat_max)) {
            throw std::invalid_argument("filter: region lat_min must be < lat_max");
        }
        if (r.lat_min < -90.0 || r.lat_max > 90.0) {
            throw std::invalid_argument("filter: region latitudes must lie in [-90, 90]");
        }
        if (r.lon_min < -180.0 || r.lon_min > 180.0 || r.lon_max < -180.0 || r.lon_max > 180.0) {
            throw std::invalid_argument("filter: region longitudes must lie in [-180, 180]");
        }
    }
}

}  // namespace

double Event::effective_magnitude() const {
    if (magnitude) return *magnitude;
    return moment_to_magnitude(*moment_nm);
}

bool Region::contains(double latitude, double longitude) const {
    if (latitude < lat_min || latitude > lat_max) return false;
    if (lon_min <= lon_max) {
        return longitude >= lon_min && longitude <= lon_max;
    }
    // Wraparound band: [lon_min, 180] union [-180, lon_max].
    return longitude >= lon_min || longitude <= lon_max;
}

ParseResult parse_catalog(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("catalog is empty");
    }
    if (strip_cr(line) != canonical_header) {
        throw FormatError(std::string("bad catalog header; expected \"") + canonical_header + "\"");
    }
    ParseResult result;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (blank(line)) continue;
        Event ev;
        if (auto problem = parse_row(line, ev)) {
            result.errors.push_back({line_no, std::move(*problem)});
        } else {
            result.events.push_back(std::move(ev));
        }
    }
    return result;
}

std::string read_file_maybe_gz(const std::string& path) {
    const bool gz = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (gz) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (f == nullptr) {
            throw FormatError("cannot open \"" + path + "\"");
        }
        std::string content;
        char buf[1 << 16];
        int n;
        while ((n = gzread(f, buf, sizeof buf)) > 0) {
            content.append(buf, static_cast<std::size_t>(n));
        }
        const bool ok = n == 0;
        gzclose(f);
        if (!ok) {
            throw FormatError("gzip read error in \"" + path + "\"");
        }
        return content;
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw FormatError("cannot open \"" + path + "\"");
    }
    std::ostringstream out;
    out << f.rdbuf();
    if (f.bad()) {
        throw FormatError("read error in \"" + path + "\"");
    }
    return out.str();
}

ParseResult parse_catalog_file(const std::string& path) {
    std::istringstream in(read_file_maybe_gz(path));
    return parse_catalog(in);
}

double moment_to_magnitude(double moment_nm) {
    if (!(moment_nm > 0.0) || !std::isfinite(moment_nm)) {
        throw std::domain_error("moment_to_magnitude: moment must be finite and > 0");
    }
    return (2.0 / 3.0) * std::log10(moment_nm) - 6.0;
}

double magnitude_to_moment(double magnitude) {
    if (!std::isfinite(magnitude)) {
        throw std::domain_error("magnitude_to_moment: magnitude must be finite");
    }
    return std::pow(10.0, 1.5 * (magnitude + 6.0));
}

std::vector<Event> filter_events(const std::vector<Event>& events, const CatalogFilter& f) {
    validate_filter(f);
    std::vector<Event> kept;
    kept.reserve(events.size());
    std::copy_if(events.begin(), events.end(), std::back_inserter(kept), [&](const Event& ev) {
        if (f.magnitude_threshold && !(ev.effective_magnitude() >= *f.magnitude_threshold)) {
            return false;
        }
        if (f.window && (ev.time < f.window->start || ev.time >= f.window->end)) {
            return false;
        }
        if (f.region && !f.region->contains(ev.latitude, ev.longitude)) {
            return false;
        }
        return true;
    });
    return kept;
}

CountSeries bin_counts(const std::vector<Event>& events, TimeWindow window,
                       std::size_t n_intervals) {
    if (n_intervals < 1) {
        throw std::invalid_argument("bin_counts: need at least one interval");
    }
    if (!(window.start < window.end)) {
        throw std::invalid_argument("bin_counts: window start must precede end");
    }
    CountSeries series;
    series.counts.assign(n_intervals, 0);
    series.window = window;
    series.n_events = static_cast<std::int64_t>(events.size());
    series.interval_days =
        duration_days(window.start, window.end) / static_cast<double>(n_intervals);

    const auto duration = static_cast<__int128>(window.end - window.start);
    for (const Event& ev : events) {
        if (ev.time < window.start || ev.time >= window.end) {
            throw std::invalid_argument("bin_counts: event at " + format_instant(ev.time) +
                                        " lies outside the window (filter events first)");
        }
        // floor((t - start) * N / D) in exact integer arithmetic.
        const auto offset = static_cast<__int128>(ev.time - window.start);
        const auto idx = offset * static_cast<__int128>(n_intervals) / duration;
        ++series.counts[static_cast<std::size_t>(idx)];
    }
    return series;
}

CountSeries parse_count_series(std::istream& in) {
    std::string line;
    std::string header;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (blank(line) || line[0] == '#') continue;
        header = line;
        break;
    }
    if (header.empty()) {
        throw FormatError("count series is empty");
    }
    if (header != "interval_index,count") {
        throw FormatError("bad count-series header; expected \"interval_index,count\"");
    }
    CountSeries series;
    std::int64_t expected_index = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (blank(line) || line[0] == '#') continue;
        const std::vector<std::string> fields = split_fields(line);
        std::int64_t index = -1, count = -1;
        auto parse_int = [](const std::string& text, std::int64_t& out) {
            const char* first = text.data();
            const char* last = first + text.size();
            const auto [ptr, ec] = std::from_chars(first, last, out);
            return ec == std::errc() && ptr == last;
        };
        if (fields.size() != 2 || !parse_int(fields[0], index) || !parse_int(fields[1], count)) {
            throw FormatError("bad count-series row \"" + line + "\"");
        }
        if (index != expected_index) {
            throw FormatError("count-series rows must be indexed 0..N-1 in order; saw " +
                              std::to_string(index) + " where " +
                              std::to_string(expected_index) + " was expected");
        }
        if (count < 0) {
            throw FormatError("negative count in row \"" + line + "\"");
        }
        series.counts.push_back(count);
        series.n_events += count;
        ++expected_index;
    }
    if (series.counts.empty()) {
        throw FormatError("count series has a header but no rows");
    }
    // Provenance fields unknown for a bare counts file; binning metadata is a
    // placeholder (one nominal day per interval) and is never re-emitted.
    series.interval_days = 1.0;
    series.window = {0, static_cast<instant_ms>(series.counts.size()) * ms_per_day};
    return series;
}

}  // namespace quakenum
