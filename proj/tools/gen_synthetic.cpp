// Deterministic synthetic-catalog generator for the end-to-end tests.
//
// Emits a gzip-compressed catalog whose in-window, in-region, above-threshold
// event counts follow a known negative-binomial law, together with the exact
// per-interval truth counts. Running
//
//   quakenum counts --input synthetic_nbd_catalog.csv.gz \
//     --start 2000-01-01 --end 2010-01-01 --intervals 800 \
//     --mt 5.0 --region 10,50,130,170
//
// must reproduce truth_counts.csv exactly: binning is integer-exact and every
// generated event sits far from every filter boundary, so no floating-point
// round-trip can move an event across a cut.
//
// Layout (seed 20080614, fixed forever):
//   * window 2000-01-01T00:00:00Z .. 2010-01-01T00:00:00Z, 800 equal bins
//     (3653 days = 315,619,200,000 ms; bin width exactly 394,524,000 ms)
//   * signal: per-bin count ~ NBD(theta=0.2, tau=3), times uniform in the
//     bin, lat in (10.1, 49.9), lon in (130.1, 169.9), magnitude
//     5.01 - log10(U); every 7th signal event reports only a seismic moment
//     (magnitude column empty), every 11th omits depth
//   * decoys (must all be filtered out): per-bin count ~ NBD(0.5, 2) cycling
//     three classes - longitude in [60, 120), latitude in [-60, 0), and
//     in-region magnitude in [4.0, 4.9)
//   * 20 events before the window, 20 after, plus one exactly at the window
//     end (half-open: excluded) and one exactly at the start (bin 0)
// Rows are sorted by time.

#include <zlib.h>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "quakenum/catalog.hpp"
#include "quakenum/simulate.hpp"
#include "quakenum/time.hpp"

namespace qn = quakenum;

namespace {

constexpr std::uint64_t seed = 20080614;
constexpr std::size_t n_bins = 800;
constexpr double signal_theta = 0.2;
constexpr std::int64_t signal_tau = 3;
constexpr double decoy_theta = 0.5;
constexpr std::int64_t decoy_tau = 2;

struct Row {
    qn::instant_ms time;
    std::string text;  // full CSV line, newline excluded
};

double uniform_in(qn::Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform_open();
}

std::string format_row(qn::instant_ms t, double lat, double lon, bool with_depth, double depth,
                       bool moment_only, double magnitude) {
    char buf[160];
    const std::string when = qn::format_instant(t);
    std::string depth_field;
    if (with_depth) {
        std::snprintf(buf, sizeof buf, "%.2f", depth);
        depth_field = buf;
    }
    std::string mag_field, moment_field;
    if (moment_only) {
        std::snprintf(buf, sizeof buf, "%.9g", qn::magnitude_to_moment(magnitude));
        moment_field = buf;
    } else {
        std::snprintf(buf, sizeof buf, "%.4f", magnitude);
        mag_field = buf;
    }
    std::snprintf(buf, sizeof buf, ",%.5f,%.5f,", lat, lon);
    return when + buf + depth_field + "," + mag_field + "," + moment_field;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path out_dir = argc > 1 ? argv[1] : "tests/data";
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "golden", ec);
    if (ec) {
        std::cerr << "error: cannot create " << (out_dir / "golden") << ": " << ec.message()
                  << "\n";
        return 1;
    }

    const qn::instant_ms start = qn::parse_instant("2000-01-01T00:00:00Z");
    const qn::instant_ms end = qn::parse_instant("2010-01-01T00:00:00Z");
    const std::int64_t span = end - start;
    if (span % static_cast<std::int64_t>(n_bins) != 0) {
        std::cerr << "error: window (" << span << " ms) not divisible by " << n_bins << " bins\n";
        return 1;
    }
    const std::int64_t bin_ms = span / static_cast<std::int64_t>(n_bins);

    qn::Rng count_rng(seed, 0);   // per-bin signal counts
    qn::Rng event_rng(seed, 1);   // signal event attributes
    qn::Rng decoy_rng(seed, 2);   // decoy counts + attributes
    qn::Rng window_rng(seed, 3);  // out-of-window events

    std::vector<Row> rows;
    std::vector<std::int64_t> truth(n_bins, 0);
    std::size_t signal_index = 0;  // global, drives the every-7th / every-11th cycles
    std::int64_t n_signal = 0, n_decoy = 0;

    for (std::size_t bin = 0; bin < n_bins; ++bin) {
        const qn::instant_ms bin_start = start + static_cast<std::int64_t>(bin) * bin_ms;
        const std::int64_t k = qn::draw_nbd(signal_theta, signal_tau, count_rng);
        truth[bin] = k;
        n_signal += k;
        for (std::int64_t j = 0; j < k; ++j, ++signal_index) {
            const qn::instant_ms t =
                bin_start + static_cast<std::int64_t>(event_rng.uniform_open() *
                                                      static_cast<double>(bin_ms));
            const double lat = uniform_in(event_rng, 10.1, 49.9);
            const double lon = uniform_in(event_rng, 130.1, 169.9);
            const double depth = uniform_in(event_rng, 0.0, 700.0);
            const double mag = 5.01 - std::log10(event_rng.uniform_open());
            const bool moment_only = signal_index % 7 == 3;
            const bool with_depth = signal_index % 11 != 5;
            rows.push_back({t, format_row(t, lat, lon, with_depth, depth, moment_only, mag)});
        }

        const std::int64_t d = qn::draw_nbd(decoy_theta, decoy_tau, decoy_rng);
        n_decoy += d;
        for (std::int64_t j = 0; j < d; ++j) {
            const qn::instant_ms t =
                bin_start + static_cast<std::int64_t>(decoy_rng.uniform_open() *
                                                      static_cast<double>(bin_ms));
            double lat, lon, mag;
            switch ((bin + static_cast<std::size_t>(j)) % 3) {
                case 0:  // east of the region
                    lat = uniform_in(decoy_rng, 10.1, 49.9);
                    lon = uniform_in(decoy_rng, 60.0, 120.0);
                    mag = 5.01 - std::log10(decoy_rng.uniform_open());
                    break;
                case 1:  // south of the region
                    lat = uniform_in(decoy_rng, -60.0, 0.0);
                    lon = uniform_in(decoy_rng, 130.1, 169.9);
                    mag = 5.01 - std::log10(decoy_rng.uniform_open());
                    break;
                default:  // in region but below the magnitude cut
                    lat = uniform_in(decoy_rng, 10.1, 49.9);
                    lon = uniform_in(decoy_rng, 130.1, 169.9);
                    mag = uniform_in(decoy_rng, 4.0, 4.9);
                    break;
            }
            const double depth = uniform_in(decoy_rng, 0.0, 700.0);
            rows.push_back({t, format_row(t, lat, lon, true, depth, false, mag)});
        }
    }

    // Out-of-window rows: filtered by the half-open window, never binned.
    for (int i = 0; i < 20; ++i) {
        const qn::instant_ms before =
            start - 1 - static_cast<std::int64_t>(window_rng.uniform_open() * 30.0 *
                                                  static_cast<double>(qn::ms_per_day));
        const qn::instant_ms after =
            end + 1 + static_cast<std::int64_t>(window_rng.uniform_open() * 30.0 *
                                                static_cast<double>(qn::ms_per_day));
        for (const qn::instant_ms t : {before, after}) {
            const double lat = uniform_in(window_rng, 10.1, 49.9);
            const double lon = uniform_in(window_rng, 130.1, 169.9);
            const double depth = uniform_in(window_rng, 0.0, 700.0);
            const double mag = 5.01 - std::log10(window_rng.uniform_open());
            rows.push_back({t, format_row(t, lat, lon, true, depth, false, mag)});
        }
    }
    // Boundary pins: exactly at start (bin 0) and exactly at end (excluded).
    rows.push_back({start, format_row(start, 30.0, 150.0, true, 33.0, false, 6.5)});
    truth[0] += 1;
    n_signal += 1;
    rows.push_back({end, format_row(end, 30.0, 150.0, true, 33.0, false, 6.5)});

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.time < b.time; });

    const std::filesystem::path catalog_path = out_dir / "synthetic_nbd_catalog.csv.gz";
    gzFile gz = gzopen(catalog_path.string().c_str(), "wb9");
    if (!gz) {
        std::cerr << "error: cannot open " << catalog_path << " for writing\n";
        return 1;
    }
    const std::string header = "time,latitude,longitude,depth_km,magnitude,moment_nm\n";
    gzwrite(gz, header.data(), static_cast<unsigned>(header.size()));
    for (const Row& row : rows) {
        const std::string line = row.text + "\n";
        gzwrite(gz, line.data(), static_cast<unsigned>(line.size()));
    }
    if (gzclose(gz) != Z_OK) {
        std::cerr << "error: gzclose failed for " << catalog_path << "\n";
        return 1;
    }

    const std::filesystem::path truth_path = out_dir / "golden" / "truth_counts.csv";
    std::ofstream truth_file(truth_path, std::ios::binary);
    truth_file << "interval_index,count\n";
    for (std::size_t i = 0; i < n_bins; ++i) {
        truth_file << i << "," << truth[i] << "\n";
    }
    truth_file.flush();
    if (!truth_file) {
        std::cerr << "error: write failed for " << truth_path << "\n";
        return 1;
    }

    std::cerr << "catalog: " << catalog_path.string() << " (" << rows.size() << " rows; "
              << n_signal << " signal, " << n_decoy << " decoys, 42 outside the window)\n";
    std::cerr << "truth:   " << truth_path.string() << " (" << n_bins << " bins)\n";
    return 0;
}
