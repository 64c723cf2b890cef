// quakenum: fit, test, and simulate count distributions of earthquake
// catalogs. Subcommands wire the library stages together:
//   counts   catalog -> per-interval event counts
//   moments  count series -> sample moment summary
//   fit      count series -> Poisson and negative-binomial fits
//   lrtest   count series -> likelihood-ratio test Poisson vs NBD
//   bands    count series -> confidence band + per-interval verdicts
//   report   catalog -> one moments/fit row per (threshold, intervals) pair
//   simulate NBD replication study with parameter recovery
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure. All outputs are byte-deterministic for a fixed configuration.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quakenum/catalog.hpp"
#include "quakenum/dist.hpp"
#include "quakenum/estimate.hpp"
#include "quakenum/ntest.hpp"
#include "quakenum/simulate.hpp"
#include "quakenum/time.hpp"

namespace {

using nlohmann::ordered_json;
namespace qn = quakenum;

constexpr const char* tool_version = "0.1.0";

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_data = 3;
constexpr int exit_numeric = 4;

// Thrown for problems in how the tool was invoked (maps to exit 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for unusable input data (maps to exit 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Formatting helpers. All numeric output goes through %.6g so files are
// compact, stable, and carry more digits than the 3-4 printed in typical
// summary tables.

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_int(std::int64_t v) {
    return std::to_string(v);
}

// Optional / NaN-aware rendering: absent values print as "-".
std::string opt_g6(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return "-";
    return g6(*v);
}

// JSON numbers rounded to the same 6 significant digits as the text formats;
// absent values become null.
ordered_json json_num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(g6(v).c_str(), nullptr);
}

ordered_json json_opt(const std::optional<double>& v) {
    if (!v) return nullptr;
    return json_num(*v);
}

const char* verdict_name(qn::Verdict v) {
    switch (v) {
        case qn::Verdict::too_few: return "too_few";
        case qn::Verdict::too_many: return "too_many";
        default: return "consistent";
    }
}

// ---------------------------------------------------------------------------
// Config echo + hash. Every output embeds the tool version, the effective
// configuration (defaults materialized), and an FNV-1a hash of its canonical
// rendering, so any file can be traced back to the invocation that made it.

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

struct Meta {
    std::string command;
    ConfigEcho config;
    std::string hash;
};

Meta make_meta(std::string command, ConfigEcho config) {
    std::string canonical = command;
    for (const auto& [k, v] : config) {
        canonical += ';';
        canonical += k;
        canonical += '=';
        canonical += v;
    }
    return {std::move(command), std::move(config), fnv1a_hex(canonical)};
}

// '#'-prefixed block for the delimited formats. `extra` carries
// command-specific annotations (band endpoints, fit notes, ...).
std::string comment_block(const Meta& meta, const ConfigEcho& extra) {
    std::string out;
    out += "# tool: quakenum ";
    out += tool_version;
    out += "\n# command: " + meta.command + "\n# config:";
    for (const auto& [k, v] : meta.config) {
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    out += "\n# config_hash: " + meta.hash + "\n";
    for (const auto& [k, v] : extra) {
        out += "# " + k + ": " + v + "\n";
    }
    return out;
}

ordered_json meta_json(const Meta& meta) {
    ordered_json j;
    j["tool"] = "quakenum";
    j["version"] = tool_version;
    j["command"] = meta.command;
    ordered_json cfg;
    for (const auto& [k, v] : meta.config) cfg[k] = v;
    j["config"] = cfg;
    j["config_hash"] = meta.hash;
    return j;
}

std::string render_table(const Meta& meta, const ConfigEcho& extra,
                         const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows, char sep) {
    std::string out = comment_block(meta, extra);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += sep;
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += sep;
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output delivery: stdout by default, files under --out when given.

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open output file " + path.string());
    f << content;
    f.flush();
    if (!f) throw DataError("write error on " + path.string());
}

void deliver(const std::string& out_dir, const std::string& filename,
             const std::string& content) {
    if (out_dir.empty()) {
        std::cout << content;
        return;
    }
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + out_dir + ": " + ec.message());
    const std::filesystem::path path = dir / filename;
    write_file(path, content);
    std::cerr << "wrote: " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// Option bag shared by all subcommands (each registers the subset it uses).

struct Options {
    std::string input;
    std::string out_dir;
    std::string format;     // per-command default applied after parsing
    std::string mt;         // comma list of thresholds (single value except `report`)
    std::string intervals;  // comma list of interval counts (single except `report`)
    std::string start;
    std::string end;
    std::string region;
    std::string smooth;     // bands: "auto" or a positive bandwidth
    std::string dist = "nbd";
    double level = 0.95;
    double theta = 0.0;
    std::int64_t tau = 0;
    std::size_t reps = 100;
    std::uint64_t seed = 12345;
    unsigned threads = 1;
    bool use_mle = false;
    bool strict = false;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    for (;;) {
        const std::size_t comma = text.find(',', begin);
        if (comma == std::string::npos) {
            parts.push_back(text.substr(begin));
            return parts;
        }
        parts.push_back(text.substr(begin, comma - begin));
        begin = comma + 1;
    }
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
    std::vector<double> values;
    for (const std::string& part : split_list(text)) {
        char* endp = nullptr;
        const double v = std::strtod(part.c_str(), &endp);
        if (part.empty() || endp != part.c_str() + part.size() || !std::isfinite(v)) {
            throw ConfigError(std::string(flag) + ": bad number \"" + part + "\"");
        }
        values.push_back(v);
    }
    return values;
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const char* flag) {
    std::vector<std::int64_t> values;
    for (const std::string& part : split_list(text)) {
        char* endp = nullptr;
        const long long v = std::strtoll(part.c_str(), &endp, 10);
        if (part.empty() || endp != part.c_str() + part.size()) {
            throw ConfigError(std::string(flag) + ": bad integer \"" + part + "\"");
        }
        values.push_back(v);
    }
    return values;
}

double parse_single_double(const std::string& text, const char* flag) {
    const auto values = parse_double_list(text, flag);
    if (values.size() != 1) throw ConfigError(std::string(flag) + ": expected one value");
    return values[0];
}

std::int64_t parse_single_int(const std::string& text, const char* flag) {
    const auto values = parse_int_list(text, flag);
    if (values.size() != 1) throw ConfigError(std::string(flag) + ": expected one value");
    return values[0];
}

qn::instant_ms parse_instant_flag(const std::string& text, const char* flag) {
    try {
        return qn::parse_instant(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(flag) + ": " + e.what());
    }
}

qn::Region parse_region(const std::string& text) {
    const auto v = parse_double_list(text, "--region");
    if (v.size() != 4) {
        throw ConfigError("--region: expected lat1,lat2,lon1,lon2");
    }
    return qn::Region{v[0], v[1], v[2], v[3]};
}

void check_format(const std::string& format) {
    if (format != "tsv" && format != "csv" && format != "json") {
        throw ConfigError("--format: expected tsv, json, or csv");
    }
}

char sep_for(const std::string& format) {
    return format == "csv" ? ',' : '\t';
}

// ---------------------------------------------------------------------------
// Input loading. `counts` and `report` require a catalog; the other series
// consumers accept either a catalog (binned on the fly) or a two-column
// count-series file, distinguished by the header line.

struct LoadedSeries {
    qn::CountSeries series;
    bool from_catalog = false;
    std::size_t parse_errors = 0;
};

bool looks_like_catalog(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        return line.rfind("time,", 0) == 0;
    }
    return false;
}

// Parses the catalog, applies strictness policy, and reports skipped rows.
std::vector<qn::Event> parse_catalog_checked(const std::string& content, const Options& o,
                                             std::size_t& n_errors) {
    std::istringstream in(content);
    qn::ParseResult parsed = qn::parse_catalog(in);
    n_errors = parsed.errors.size();
    if (!parsed.errors.empty()) {
        if (o.strict) {
            std::string msg = "strict mode: " + std::to_string(parsed.errors.size()) +
                              " invalid row(s)";
            const std::size_t show = std::min<std::size_t>(parsed.errors.size(), 5);
            for (std::size_t i = 0; i < show; ++i) {
                msg += "\n  line " + std::to_string(parsed.errors[i].line) + ": " +
                       parsed.errors[i].message;
            }
            throw DataError(msg);
        }
        std::cerr << "warning: skipped " << parsed.errors.size() << " invalid row(s) (first: line "
                  << parsed.errors.front().line << ": " << parsed.errors.front().message << ")\n";
    }
    if (parsed.events.empty()) {
        throw DataError("catalog contains no valid events");
    }
    return std::move(parsed.events);
}

// Catalog-mode settings -> filter + window + interval count, with the echo
// entries appended in a fixed order.
struct CatalogPlan {
    qn::CatalogFilter filter;
    qn::TimeWindow window;
    std::size_t n_intervals = 0;
};

CatalogPlan catalog_plan(const Options& o, std::optional<double> mt_override,
                         std::optional<std::size_t> intervals_override) {
    if (o.start.empty() || o.end.empty()) {
        throw ConfigError("catalog input needs --start and --end");
    }
    CatalogPlan plan;
    plan.window.start = parse_instant_flag(o.start, "--start");
    plan.window.end = parse_instant_flag(o.end, "--end");
    if (!(plan.window.start < plan.window.end)) {
        throw ConfigError("--start must precede --end");
    }
    if (intervals_override) {
        plan.n_intervals = *intervals_override;
    } else {
        if (o.intervals.empty()) throw ConfigError("catalog input needs --intervals");
        const std::int64_t n = parse_single_int(o.intervals, "--intervals");
        if (n < 1) throw ConfigError("--intervals: need at least 1");
        plan.n_intervals = static_cast<std::size_t>(n);
    }
    plan.filter.window = plan.window;
    if (mt_override) {
        plan.filter.magnitude_threshold = *mt_override;
    } else if (!o.mt.empty()) {
        plan.filter.magnitude_threshold = parse_single_double(o.mt, "--mt");
    }
    if (!o.region.empty()) plan.filter.region = parse_region(o.region);
    return plan;
}

void echo_catalog_flags(const Options& o, ConfigEcho& echo) {
    echo.emplace_back("start", o.start);
    echo.emplace_back("end", o.end);
    echo.emplace_back("intervals", o.intervals);
    if (!o.mt.empty()) echo.emplace_back("mt", o.mt);
    if (!o.region.empty()) echo.emplace_back("region", o.region);
    echo.emplace_back("strict", o.strict ? "true" : "false");
}

LoadedSeries load_series(const Options& o, ConfigEcho& echo) {
    if (o.input.empty()) throw ConfigError("--input is required");
    echo.emplace_back("input", o.input);
    const std::string content = qn::read_file_maybe_gz(o.input);
    LoadedSeries loaded;
    if (looks_like_catalog(content)) {
        loaded.from_catalog = true;
        echo_catalog_flags(o, echo);
        const CatalogPlan plan = catalog_plan(o, std::nullopt, std::nullopt);
        const std::vector<qn::Event> events = parse_catalog_checked(content, o, loaded.parse_errors);
        const std::vector<qn::Event> kept = qn::filter_events(events, plan.filter);
        loaded.series = qn::bin_counts(kept, plan.window, plan.n_intervals);
        loaded.series.source_id = o.input;
    } else {
        if (!o.start.empty() || !o.end.empty() || !o.intervals.empty() || !o.mt.empty() ||
            !o.region.empty() || o.strict) {
            throw ConfigError(
                "--start/--end/--intervals/--mt/--region/--strict apply only to catalog inputs");
        }
        std::istringstream in(content);
        loaded.series = qn::parse_count_series(in);
        loaded.series.source_id = o.input;
    }
    return loaded;
}

// ---------------------------------------------------------------------------
// counts

int run_counts(const Options& o) {
    if (o.input.empty()) throw ConfigError("--input is required");
    ConfigEcho echo;
    echo.emplace_back("input", o.input);
    echo_catalog_flags(o, echo);
    const std::string content = qn::read_file_maybe_gz(o.input);
    if (!looks_like_catalog(content)) {
        throw DataError("counts expects a catalog input (header \"time,...\")");
    }
    const CatalogPlan plan = catalog_plan(o, std::nullopt, std::nullopt);
    std::size_t n_errors = 0;
    const std::vector<qn::Event> events = parse_catalog_checked(content, o, n_errors);
    const std::vector<qn::Event> kept = qn::filter_events(events, plan.filter);
    qn::CountSeries series = qn::bin_counts(kept, plan.window, plan.n_intervals);
    series.source_id = o.input;

    const Meta meta = make_meta("counts", echo);
    ConfigEcho extra;
    extra.emplace_back("n_events", format_int(series.n_events));
    extra.emplace_back("interval_days", g6(series.interval_days));
    extra.emplace_back("window", qn::format_instant(series.window.start) + "/" +
                                     qn::format_instant(series.window.end));

    std::vector<std::vector<std::string>> rows;
    rows.reserve(series.counts.size());
    for (std::size_t i = 0; i < series.counts.size(); ++i) {
        rows.push_back({format_int(static_cast<std::int64_t>(i)), format_int(series.counts[i])});
    }
    deliver(o.out_dir, "counts.csv",
            render_table(meta, extra, {"interval_index", "count"}, rows, ','));

    if (!o.out_dir.empty()) {
        ordered_json j;
        j["metadata"] = meta_json(meta);
        ordered_json s;
        s["n_events"] = series.n_events;
        s["n_intervals"] = series.counts.size();
        s["interval_days"] = json_num(series.interval_days);
        s["window"] = {{"start", qn::format_instant(series.window.start)},
                       {"end", qn::format_instant(series.window.end)}};
        ordered_json filter;
        filter["magnitude_threshold"] =
            plan.filter.magnitude_threshold ? json_num(*plan.filter.magnitude_threshold)
                                            : ordered_json(nullptr);
        if (plan.filter.region) {
            filter["region"] = {{"lat_min", plan.filter.region->lat_min},
                                {"lat_max", plan.filter.region->lat_max},
                                {"lon_min", plan.filter.region->lon_min},
                                {"lon_max", plan.filter.region->lon_max}};
        } else {
            filter["region"] = nullptr;
        }
        s["filter"] = filter;
        s["source"] = o.input;
        s["parse_errors_skipped"] = n_errors;
        j["series"] = s;
        deliver(o.out_dir, "counts_meta.json", j.dump(2) + "\n");
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// moments

int run_moments(const Options& o) {
    ConfigEcho echo;
    const LoadedSeries loaded = load_series(o, echo);
    echo.emplace_back("format", o.format);
    const qn::MomentSummary m = qn::sample_moments(loaded.series);
    const Meta meta = make_meta("moments", echo);

    if (o.format == "json") {
        ordered_json j;
        j["metadata"] = meta_json(meta);
        ordered_json mm;
        mm["n_intervals"] = m.n_intervals;
        mm["mean"] = json_num(m.mean);
        mm["variance"] = json_opt(m.variance);
        mm["skewness"] = json_opt(m.skewness);
        mm["excess_kurtosis"] = json_opt(m.excess_kurtosis);
        j["moments"] = mm;
        deliver(o.out_dir, "moments.json", j.dump(2) + "\n");
    } else {
        std::vector<std::vector<std::string>> rows{{format_int(static_cast<std::int64_t>(m.n_intervals)),
                                                    g6(m.mean), opt_g6(m.variance),
                                                    opt_g6(m.skewness), opt_g6(m.excess_kurtosis)}};
        deliver(o.out_dir, "moments." + o.format,
                render_table(meta, {},
                             {"n_intervals", "mean", "variance", "skewness", "excess_kurtosis"},
                             rows, sep_for(o.format)));
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// fit

int run_fit(const Options& o) {
    ConfigEcho echo;
    const LoadedSeries loaded = load_series(o, echo);
    echo.emplace_back("format", o.format);
    const std::span<const std::int64_t> counts(loaded.series.counts);

    const qn::PoissonFit poisson = qn::fit_poisson(counts);
    const qn::MomentSummary m = qn::sample_moments(counts);

    std::optional<qn::NbdFit> nbd_moments;
    std::optional<qn::NbdFit> nbd_mle;
    std::string moments_reason, mle_reason;
    if (!m.variance) {
        moments_reason = mle_reason = "need at least 2 intervals to fit a negative binomial";
    } else {
        try {
            const qn::NbdParams params = qn::fit_nbd_moments(m.mean, *m.variance);
            nbd_moments = qn::NbdFit{params, qn::nbd_log_likelihood(counts, params),
                                     qn::FitMethod::moments};
        } catch (const qn::UnderdispersedError& e) {
            moments_reason = e.what();
        } catch (const std::domain_error& e) {
            moments_reason = e.what();  // zero-mean series
        }
        try {
            nbd_mle = qn::fit_nbd_mle(counts);
        } catch (const qn::UnderdispersedError& e) {
            mle_reason = e.what();
        }
    }

    const Meta meta = make_meta("fit", echo);
    if (o.format == "json") {
        ordered_json j;
        j["metadata"] = meta_json(meta);
        ordered_json fits;
        fits["poisson"] = {{"method", "mle"},
                           {"lambda", json_num(poisson.params.lambda)},
                           {"log_likelihood", json_num(poisson.log_likelihood)}};
        const auto nbd_json = [](const qn::NbdFit& fit) {
            return ordered_json{{"method", fit.method == qn::FitMethod::mle ? "mle" : "moments"},
                                {"theta", json_num(fit.params.theta)},
                                {"tau", json_num(fit.params.tau)},
                                {"log_likelihood", json_num(fit.log_likelihood)}};
        };
        fits["nbd_moments"] = nbd_moments ? nbd_json(*nbd_moments) : ordered_json(nullptr);
        fits["nbd_mle"] = nbd_mle ? nbd_json(*nbd_mle) : ordered_json(nullptr);
        j["fits"] = fits;
        j["nbd_moments_unavailable_reason"] =
            moments_reason.empty() ? ordered_json(nullptr) : ordered_json(moments_reason);
        j["nbd_mle_unavailable_reason"] =
            mle_reason.empty() ? ordered_json(nullptr) : ordered_json(mle_reason);
        deliver(o.out_dir, "fit.json", j.dump(2) + "\n");
    } else {
        ConfigEcho extra;
        if (!moments_reason.empty()) extra.emplace_back("note", moments_reason);
        if (!mle_reason.empty()) extra.emplace_back("note", mle_reason);
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"poisson", "mle", g6(poisson.params.lambda), "-", "-",
                        g6(poisson.log_likelihood)});
        const auto nbd_row = [](const char* label, const std::optional<qn::NbdFit>& fit) {
            if (!fit) {
                return std::vector<std::string>{"nbd", label, "-", "-", "-", "-"};
            }
            return std::vector<std::string>{"nbd",
                                            label,
                                            "-",
                                            g6(fit->params.theta),
                                            g6(fit->params.tau),
                                            g6(fit->log_likelihood)};
        };
        rows.push_back(nbd_row("moments", nbd_moments));
        rows.push_back(nbd_row("mle", nbd_mle));
        deliver(o.out_dir, "fit." + o.format,
                render_table(meta, extra,
                             {"model", "method", "lambda", "theta", "tau", "log_likelihood"}, rows,
                             sep_for(o.format)));
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// lrtest

int run_lrtest(const Options& o) {
    ConfigEcho echo;
    const LoadedSeries loaded = load_series(o, echo);
    echo.emplace_back("format", o.format);
    echo.emplace_back("level", g6(o.level));
    if (!(o.level > 0.0) || !(o.level < 1.0)) {
        throw ConfigError("--level must lie strictly in (0, 1)");
    }
    const qn::LrTestResult r = qn::lr_test(loaded.series, o.level);
    const Meta meta = make_meta("lrtest", echo);

    if (o.format == "json") {
        ordered_json j;
        j["metadata"] = meta_json(meta);
        ordered_json t;
        t["ell_nbd"] = json_num(r.nbd.log_likelihood);
        t["ell_poisson"] = json_num(r.poisson.log_likelihood);
        t["statistic"] = json_num(r.statistic);
        t["p_value"] = json_num(r.p_value);
        t["reject"] = r.reject;
        t["confidence_level"] = json_num(r.confidence_level);
        t["fits"] = {{"lambda", json_num(r.poisson.params.lambda)},
                     {"theta", json_num(r.nbd.params.theta)},
                     {"tau", json_num(r.nbd.params.tau)}};
        j["lrtest"] = t;
        deliver(o.out_dir, "lrtest.json", j.dump(2) + "\n");
    } else {
        ConfigEcho extra;
        extra.emplace_back("lambda", g6(r.poisson.params.lambda));
        extra.emplace_back("theta", g6(r.nbd.params.theta));
        extra.emplace_back("tau", g6(r.nbd.params.tau));
        std::vector<std::vector<std::string>> rows{
            {g6(r.nbd.log_likelihood), g6(r.poisson.log_likelihood), g6(r.statistic),
             g6(r.p_value), r.reject ? "true" : "false", g6(r.confidence_level)}};
        deliver(o.out_dir, "lrtest." + o.format,
                render_table(meta, extra,
                             {"ell_nbd", "ell_poisson", "statistic", "p_value", "reject",
                              "confidence_level"},
                             rows, sep_for(o.format)));
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// bands

int run_bands(const Options& o) {
    if (o.dist != "poisson" && o.dist != "nbd" && o.dist != "empirical") {
        throw ConfigError("--dist: expected poisson, nbd, or empirical");
    }
    if (!(o.level > 0.0) || !(o.level < 1.0)) {
        throw ConfigError("--level must lie strictly in (0, 1)");
    }
    if (!o.smooth.empty() && o.dist != "empirical") {
        throw ConfigError("--smooth applies only to --dist empirical");
    }
    ConfigEcho echo;
    const LoadedSeries loaded = load_series(o, echo);
    echo.emplace_back("format", o.format);
    echo.emplace_back("level", g6(o.level));
    echo.emplace_back("dist", o.dist);
    if (!o.smooth.empty()) echo.emplace_back("smooth", o.smooth);
    const std::span<const std::int64_t> counts(loaded.series.counts);
    const qn::MomentSummary m = qn::sample_moments(counts);

    // Per-interval verdicts against the shared band.
    std::vector<std::vector<std::string>> rows;
    ordered_json verdicts = ordered_json::array();
    std::size_t n_outside = 0;
    const auto emit = [&](std::size_t i, std::int64_t c, const qn::NumberTestResult& r) {
        if (r.verdict != qn::Verdict::consistent) ++n_outside;
        if (o.format == "json") {
            verdicts.push_back({{"interval_index", i},
                                {"count", c},
                                {"verdict", verdict_name(r.verdict)},
                                {"tail_probability", json_num(r.tail_probability)}});
        } else {
            rows.push_back({format_int(static_cast<std::int64_t>(i)), format_int(c),
                            verdict_name(r.verdict), g6(r.tail_probability)});
        }
    };
    const auto run_verdicts = [&](const auto& ref) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            emit(i, counts[i], qn::number_test(counts[i], ref, o.level));
        }
    };

    // Reference distribution fitted from the series itself.
    qn::Band band;
    ConfigEcho ref_echo;
    ordered_json ref_json;
    if (o.dist == "poisson") {
        if (m.mean <= 0.0) {
            throw qn::DegenerateSeriesError("bands: every count is zero, no Poisson reference");
        }
        const qn::PoissonParams ref(m.mean);
        band = qn::confidence_band(ref, o.level);
        ref_echo.emplace_back("lambda", g6(ref.lambda));
        ref_json = {{"reference", "poisson"}, {"lambda", json_num(ref.lambda)}};
        run_verdicts(ref);
    } else if (o.dist == "nbd") {
        const qn::NbdParams ref =
            qn::fit_nbd_moments(m.mean, m.variance ? *m.variance : 0.0);
        band = qn::confidence_band(ref, o.level);
        ref_echo.emplace_back("theta", g6(ref.theta));
        ref_echo.emplace_back("tau", g6(ref.tau));
        ref_json = {{"reference", "nbd"},
                    {"theta", json_num(ref.theta)},
                    {"tau", json_num(ref.tau)}};
        run_verdicts(ref);
    } else {
        qn::EmpiricalDist dist = qn::empirical_distribution(loaded.series);
        if (!o.smooth.empty()) {
            if (o.smooth == "auto") {
                dist = qn::smooth_auto(dist);
            } else {
                const double h = parse_single_double(o.smooth, "--smooth");
                if (!(h > 0.0)) throw ConfigError("--smooth: bandwidth must be > 0");
                dist = qn::smooth(dist, h);
            }
        }
        band = qn::confidence_band(dist, o.level);
        ref_echo.emplace_back("smoothed", dist.smoothed ? "true" : "false");
        if (dist.bandwidth) ref_echo.emplace_back("bandwidth", g6(*dist.bandwidth));
        ref_json = {{"reference", "empirical"},
                    {"smoothed", dist.smoothed},
                    {"bandwidth", json_opt(dist.bandwidth)}};
        run_verdicts(dist);
    }

    const Meta meta = make_meta("bands", echo);
    if (o.format == "json") {
        ordered_json j;
        j["metadata"] = meta_json(meta);
        j["band"] = {{"lower", band.lower},
                     {"upper", band.upper},
                     {"level", json_num(band.level)}};
        j["reference_params"] = ref_json;
        j["n_outside"] = n_outside;
        j["verdicts"] = verdicts;
        deliver(o.out_dir, "bands.json", j.dump(2) + "\n");
    } else {
        ConfigEcho extra;
        extra.emplace_back("reference", o.dist);
        for (auto& kv : ref_echo) extra.push_back(kv);
        extra.emplace_back("band_lower", format_int(band.lower));
        extra.emplace_back("band_upper", format_int(band.upper));
        extra.emplace_back("level", g6(band.level));
        extra.emplace_back("n_outside", format_int(static_cast<std::int64_t>(n_outside)));
        deliver(o.out_dir, "bands." + o.format,
                render_table(meta, extra,
                             {"interval_index", "count", "verdict", "tail_probability"}, rows,
                             sep_for(o.format)));
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// report

int run_report(const Options& o) {
    if (o.input.empty()) throw ConfigError("--input is required");
    if (o.mt.empty() || o.intervals.empty()) {
        throw ConfigError("report needs --mt and --intervals (comma lists allowed)");
    }
    ConfigEcho echo;
    echo.emplace_back("input", o.input);
    echo_catalog_flags(o, echo);
    echo.emplace_back("format", o.format);
    const std::vector<double> thresholds = parse_double_list(o.mt, "--mt");
    const std::vector<std::int64_t> interval_counts = parse_int_list(o.intervals, "--intervals");
    for (const std::int64_t n : interval_counts) {
        if (n < 1) throw ConfigError("--intervals: every value must be >= 1");
    }

    const std::string content = qn::read_file_maybe_gz(o.input);
    if (!looks_like_catalog(content)) {
        throw DataError("report expects a catalog input (header \"time,...\")");
    }
    std::size_t n_errors = 0;
    const std::vector<qn::Event> events = parse_catalog_checked(content, o, n_errors);

    const Meta meta = make_meta("report", echo);
    std::vector<std::vector<std::string>> rows;
    ordered_json json_rows = ordered_json::array();
    for (const double mt : thresholds) {
        const CatalogPlan plan = catalog_plan(o, mt, static_cast<std::size_t>(1));
        const std::vector<qn::Event> kept = qn::filter_events(events, plan.filter);
        for (const std::int64_t n_int : interval_counts) {
            const qn::CountSeries series =
                qn::bin_counts(kept, plan.window, static_cast<std::size_t>(n_int));
            const qn::MomentSummary m = qn::sample_moments(series);

            std::optional<qn::NbdParams> nbd;
            if (m.variance) {
                try {
                    nbd = qn::fit_nbd_moments(m.mean, *m.variance);
                } catch (const qn::UnderdispersedError&) {
                    // Not overdispersed: NBD columns stay unavailable.
                } catch (const std::domain_error&) {
                    // Zero mean: nothing to fit.
                }
            }
            std::optional<double> eta_n, psi_n, eta_p, psi_p, theta, tau;
            if (nbd) {
                const qn::DistMoments dm = qn::theoretical_moments(*nbd);
                theta = nbd->theta;
                tau = nbd->tau;
                eta_n = dm.skewness;
                psi_n = dm.excess_kurtosis;
            }
            if (m.mean > 0.0) {
                const qn::DistMoments pm = qn::theoretical_moments(qn::PoissonParams(m.mean));
                eta_p = pm.skewness;
                psi_p = pm.excess_kurtosis;
            }
            if (o.format == "json") {
                json_rows.push_back({{"mt", json_num(mt)},
                                     {"n", series.n_events},
                                     {"N", series.counts.size()},
                                     {"lambda", json_num(m.mean)},
                                     {"variance", json_opt(m.variance)},
                                     {"theta", json_opt(theta)},
                                     {"tau", json_opt(tau)},
                                     {"eta_o", json_opt(m.skewness)},
                                     {"psi_o", json_opt(m.excess_kurtosis)},
                                     {"eta_n", json_opt(eta_n)},
                                     {"psi_n", json_opt(psi_n)},
                                     {"eta_p", json_opt(eta_p)},
                                     {"psi_p", json_opt(psi_p)},
                                     {"interval_days", json_num(series.interval_days)}});
            } else {
                rows.push_back({g6(mt), format_int(series.n_events),
                                format_int(static_cast<std::int64_t>(series.counts.size())),
                                g6(m.mean), opt_g6(m.variance), opt_g6(theta), opt_g6(tau),
                                opt_g6(m.skewness), opt_g6(m.excess_kurtosis), opt_g6(eta_n),
                                opt_g6(psi_n), opt_g6(eta_p), opt_g6(psi_p),
                                g6(series.interval_days)});
            }
        }
    }

    if (o.format == "json") {
        ordered_json j;
        j["metadata"] = meta_json(meta);
        j["rows"] = json_rows;
        deliver(o.out_dir, "report.json", j.dump(2) + "\n");
    } else {
        deliver(o.out_dir, "report." + o.format,
                render_table(meta, {},
                             {"mt", "n", "N", "lambda", "variance", "theta", "tau", "eta_o",
                              "psi_o", "eta_n", "psi_n", "eta_p", "psi_p", "interval_days"},
                             rows, sep_for(o.format)));
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const Options& o) {
    if (!o.format.empty() && o.format != "json") {
        throw ConfigError("simulate emits a JSON report (plus scatter.csv under --out); "
                          "--format json is the only choice");
    }
    if (!(o.theta > 0.0) || !(o.theta < 1.0)) {
        throw ConfigError("--theta must lie strictly in (0, 1)");
    }
    if (o.tau < 1) throw ConfigError("--tau must be a positive integer");
    if (o.intervals.empty()) throw ConfigError("simulate needs --intervals");
    const std::int64_t n_int = parse_single_int(o.intervals, "--intervals");
    if (n_int < 1) throw ConfigError("--intervals: need at least 1");
    if (o.reps < 1) throw ConfigError("--reps: need at least 1");
    if (o.threads < 1) throw ConfigError("--threads: need at least 1");

    qn::SimConfig cfg;
    cfg.theta = o.theta;
    cfg.tau = o.tau;
    cfg.n_intervals = static_cast<std::size_t>(n_int);
    cfg.replications = o.reps;
    cfg.seed = o.seed;
    cfg.n_threads = o.threads;
    cfg.use_mle = o.use_mle;

    ConfigEcho echo;
    echo.emplace_back("theta", g6(o.theta));
    echo.emplace_back("tau", format_int(o.tau));
    echo.emplace_back("intervals", format_int(n_int));
    echo.emplace_back("reps", format_int(static_cast<std::int64_t>(o.reps)));
    echo.emplace_back("seed", std::to_string(o.seed));
    echo.emplace_back("threads", std::to_string(o.threads));
    echo.emplace_back("estimator", o.use_mle ? "mle" : "moments");
    const Meta meta = make_meta("simulate", echo);

    const qn::ReplicationReport report = qn::run_replication_study(cfg);

    ordered_json j;
    j["metadata"] = meta_json(meta);
    j["config"] = {{"theta", json_num(cfg.theta)},
                   {"tau", cfg.tau},
                   {"n_intervals", cfg.n_intervals},
                   {"replications", cfg.replications},
                   {"seed", cfg.seed},
                   {"threads", cfg.n_threads},
                   {"estimator", cfg.use_mle ? "mle" : "moments"}};
    const auto stat_json = [](const qn::SummaryStat& s) {
        return ordered_json{{"mean", json_num(s.mean)}, {"sd", json_num(s.sd)}, {"n", s.n}};
    };
    j["summaries"] = {{"lambda", stat_json(report.lambda)},
                      {"theta_hat", stat_json(report.theta_hat)},
                      {"tau_hat", stat_json(report.tau_hat)},
                      {"eta_s", stat_json(report.eta_s)},
                      {"psi_s", stat_json(report.psi_s)},
                      {"eta_n", stat_json(report.eta_n)},
                      {"psi_n", stat_json(report.psi_n)},
                      {"eta_p", stat_json(report.eta_p)},
                      {"psi_p", stat_json(report.psi_p)}};
    j["rho_eta_psi"] = json_num(report.rho_eta_psi);
    j["n_underdispersed"] = report.n_underdispersed;
    ordered_json reps = ordered_json::array();
    for (const qn::ReplicationEstimates& est : report.replications) {
        reps.push_back({{"lambda", json_num(est.lambda)},
                        {"theta_hat", json_opt(est.theta_hat)},
                        {"tau_hat", json_opt(est.tau_hat)},
                        {"eta_s", json_opt(est.eta_s)},
                        {"psi_s", json_opt(est.psi_s)},
                        {"eta_n", json_opt(est.eta_n)},
                        {"psi_n", json_opt(est.psi_n)},
                        {"eta_p", json_opt(est.eta_p)},
                        {"psi_p", json_opt(est.psi_p)}});
    }
    j["replications"] = reps;
    deliver(o.out_dir, "replication_report.json", j.dump(2) + "\n");

    if (!o.out_dir.empty()) {
        // Scatter of the per-replication sample skewness/kurtosis pairs.
        std::vector<std::vector<std::string>> rows;
        for (const qn::ReplicationEstimates& est : report.replications) {
            if (est.eta_s && est.psi_s) {
                rows.push_back({g6(*est.eta_s), g6(*est.psi_s)});
            }
        }
        deliver(o.out_dir, "scatter.csv", render_table(meta, {}, {"eta_s", "psi_s"}, rows, ','));
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"quakenum: count-distribution statistics for earthquake catalogs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("quakenum ") + tool_version);

    const auto add_io = [&](CLI::App* sub, bool with_format = true) {
        sub->add_option("--input", o.input, "catalog CSV (.gz accepted) or counts CSV");
        sub->add_option("--out", o.out_dir, "output directory (default: stdout)");
        if (with_format) {
            sub->add_option("--format", o.format, "output format: tsv|json|csv");
        }
    };
    const auto add_catalog = [&](CLI::App* sub) {
        sub->add_option("--mt", o.mt, "magnitude threshold (report: comma list)");
        sub->add_option("--start", o.start, "window start, ISO-8601 UTC");
        sub->add_option("--end", o.end, "window end (exclusive), ISO-8601 UTC");
        sub->add_option("--region", o.region, "lat1,lat2,lon1,lon2 rectangle");
        sub->add_option("--intervals", o.intervals, "number of intervals (report: comma list)");
        sub->add_flag("--strict", o.strict, "treat invalid catalog rows as fatal");
    };

    CLI::App* counts = app.add_subcommand("counts", "bin a catalog into per-interval counts");
    add_io(counts, /*with_format=*/false);
    add_catalog(counts);

    CLI::App* moments = app.add_subcommand("moments", "sample moments of a count series");
    add_io(moments);
    add_catalog(moments);

    CLI::App* fit = app.add_subcommand("fit", "Poisson and negative-binomial fits");
    add_io(fit);
    add_catalog(fit);

    CLI::App* lrtest = app.add_subcommand("lrtest", "likelihood-ratio test Poisson vs NBD");
    add_io(lrtest);
    add_catalog(lrtest);
    lrtest->add_option("--level", o.level, "rejection confidence level (default 0.95)");

    CLI::App* bands = app.add_subcommand("bands", "confidence band + per-interval verdicts");
    add_io(bands);
    add_catalog(bands);
    bands->add_option("--level", o.level, "band coverage level (default 0.95)");
    bands->add_option("--dist", o.dist, "reference law: poisson|nbd|empirical");
    bands->add_option("--smooth", o.smooth, "empirical smoothing: auto or a bandwidth");

    CLI::App* report = app.add_subcommand("report", "moments/fit table over (mt, intervals)");
    add_io(report);
    add_catalog(report);

    CLI::App* simulate = app.add_subcommand("simulate", "NBD replication study");
    add_io(simulate);
    simulate->add_option("--theta", o.theta, "NBD success probability, in (0,1)")->required();
    simulate->add_option("--tau", o.tau, "NBD shape (positive integer)")->required();
    simulate->add_option("--intervals", o.intervals, "counts per replication")->required();
    simulate->add_option("--reps", o.reps, "number of replications (default 100)");
    simulate->add_option("--seed", o.seed, "random seed (default 12345)");
    simulate->add_option("--threads", o.threads, "worker threads (default 1)");
    simulate->add_flag("--mle", o.use_mle, "estimate by MLE instead of moments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try {
        if (app.got_subcommand(simulate)) return run_simulate(o);  // validates --format itself
        if (o.format.empty()) o.format = "tsv";
        check_format(o.format);
        if (app.got_subcommand(counts)) return run_counts(o);
        if (app.got_subcommand(moments)) return run_moments(o);
        if (app.got_subcommand(fit)) return run_fit(o);
        if (app.got_subcommand(lrtest)) return run_lrtest(o);
        if (app.got_subcommand(bands)) return run_bands(o);
        if (app.got_subcommand(report)) return run_report(o);
        return exit_config;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const qn::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    } catch (const qn::UnderdispersedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.poisson_consistent) {
            std::cerr << "note: the series is Poisson-consistent"
                      << " (mean " << g6(e.mean) << ", variance " << g6(e.variance) << ")\n";
        }
        return exit_numeric;
    } catch (const qn::EstimationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}
