#include "oracles.hpp"

#include <sys/wait.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oracle {

double chi2_tail_by_quadrature(double x) {
    if (x < 0.0) throw std::domain_error("chi2_tail_by_quadrature: x < 0");
    if (x == 0.0) return 1.0;
    // Composite Simpson on [x, x+460]; the integrand decays like exp(-t/2),
    // so the truncated remainder is below exp(-230) of the leading scale.
    const long double a = x;
    const long double b = x + 460.0L;
    const std::size_t n = 1u << 21;  // even; h ~ 2.2e-4
    const long double h = (b - a) / static_cast<long double>(n);
    const auto f = [](long double t) -> long double {
        return std::exp(-t / 2.0L) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L * t);
    };
    long double sum = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) {
        const long double t = a + h * static_cast<long double>(i);
        sum += f(t) * ((i & 1u) ? 4.0L : 2.0L);
    }
    return static_cast<double>(sum * h / 3.0L);
}

double poisson_pmf_recurrence(std::int64_t k, double lambda) {
    if (k < 0) return 0.0;
    long double p = std::exp(static_cast<long double>(-lambda));
    for (std::int64_t j = 1; j <= k; ++j) {
        p *= static_cast<long double>(lambda) / static_cast<long double>(j);
    }
    return static_cast<double>(p);
}

double nbd_pmf_recurrence(std::int64_t k, double theta, std::int64_t tau) {
    if (k < 0) return 0.0;
    long double p = std::pow(static_cast<long double>(theta), static_cast<long double>(tau));
    const long double q = 1.0L - static_cast<long double>(theta);
    for (std::int64_t j = 1; j <= k; ++j) {
        p *= q * static_cast<long double>(tau + j - 1) / static_cast<long double>(j);
    }
    return static_cast<double>(p);
}

SummedMoments moments_by_summation(const std::function<double(std::int64_t)>& pmf,
                                   std::int64_t k_max) {
    long double total = 0.0L, m1 = 0.0L;
    for (std::int64_t k = 0; k <= k_max; ++k) {
        const long double p = pmf(k);
        total += p;
        m1 += p * static_cast<long double>(k);
    }
    const long double mean = m1 / total;  // renormalize the truncated sweep
    long double c2 = 0.0L, c3 = 0.0L, c4 = 0.0L;
    for (std::int64_t k = 0; k <= k_max; ++k) {
        const long double p = pmf(k) / total;
        const long double d = static_cast<long double>(k) - mean;
        c2 += p * d * d;
        c3 += p * d * d * d;
        c4 += p * d * d * d * d;
    }
    SummedMoments out;
    out.mean = static_cast<double>(mean);
    out.variance = static_cast<double>(c2);
    out.skewness = static_cast<double>(c3 / std::pow(c2, 1.5L));
    out.excess_kurtosis = static_cast<double>(c4 / (c2 * c2) - 3.0L);
    out.total_probability = static_cast<double>(total);
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("pearson: need two same-length vectors, n >= 2");
    }
    const std::size_t n = x.size();
    long double mx = 0.0L, my = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<long double>(n);
    my /= static_cast<long double>(n);
    long double sxx = 0.0L, syy = 0.0L, sxy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Frozen with 40-digit arithmetic; stored well beyond double precision.
const std::vector<XY> lgamma_table = {
    {1e-3, 6.9071788853838536617},
    {0.01, 4.5994798780420217016},
    {0.1, 2.252712651734205902},
    {0.5, 0.57236494292470008707},
    {0.99, 0.0058548067647097814532},
    {1.0, 0.0},
    {1.5, -0.12078223763524522235},
    {2.0, 0.0},
    {2.5, 0.28468287047291915963},
    {5.5, 3.9578139676187162939},
    {10.0, 12.801827480081469611},
    {58.91, 180.09014717855935162},
    {100.0, 359.13420536957539878},
    {1000.0, 5905.2204232091812118},
    {11781.0, 98653.192650717649714},
    {1e4, 82099.717496442377273},
    {1e5, 1051287.7089736568949},
    {1e6, 12815504.56914761166},
    {1e7, 151180949.36947391394},
};

const std::vector<XY> normal_cdf_table = {
    {-8.0, 6.22096057427178412e-16},
    {-3.0, 0.00134989803163009453},
    {-1.0, 0.158655253931457051},
    {0.0, 0.5},
    {1.0, 0.841344746068542949},
    {1.959963985, 0.975000000026881557},
    {3.0, 0.998650101968369905},
    {8.0, 0.999999999999999378},
};

const std::vector<XY> chi2_tail_table = {
    {0.1, 0.751829634045849},
    {1.0, 0.317310507862914},
    {4.0, 0.0455002638963584},
    {10.0, 0.00156540225800255},
    {30.0, 4.3204630578275e-8},
};

double printed_unit(const std::string& printed) {
    const std::size_t e = printed.find_first_of("eE");
    const std::string mantissa = e == std::string::npos ? printed : printed.substr(0, e);
    int exponent = 0;
    if (e != std::string::npos) exponent = std::atoi(printed.c_str() + e + 1);
    const std::size_t dot = mantissa.find('.');
    int frac_digits = 0;
    if (dot != std::string::npos) {
        frac_digits = static_cast<int>(mantissa.size() - dot - 1);
    }
    return std::pow(10.0, exponent - frac_digits);
}

CliResult run_cli(const std::string& argv_tail, bool merge_stderr) {
    const std::string cmd = std::string(QUAKENUM_CLI_PATH) + " " + argv_tail +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
    std::string output;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        output.append(buf, got);
    }
    const int status = pclose(pipe);
    CliResult r;
    r.output = std::move(output);
    r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

namespace {

std::vector<std::string> data_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::string token;
        for (const char c : line) {
            if (c == ',' || c == '\t') {
                tokens.push_back(token);
                token.clear();
            } else {
                token += c;
            }
        }
        tokens.push_back(token);
    }
    return tokens;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

std::string compare_tables(const std::string& got, const std::string& want, double rel) {
    const std::vector<std::string> a = data_tokens(got);
    const std::vector<std::string> b = data_tokens(want);
    if (a.size() != b.size()) {
        return "token count mismatch: " + std::to_string(a.size()) + " vs " +
               std::to_string(b.size());
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        double xa, xb;
        const bool na = parse_number(a[i], xa);
        const bool nb = parse_number(b[i], xb);
        if (na && nb) {
            const double scale = std::max(std::abs(xa), std::abs(xb));
            if (std::abs(xa - xb) > rel * scale + 1e-9) {
                return "numeric mismatch at token " + std::to_string(i) + ": " + a[i] + " vs " +
                       b[i];
            }
        } else if (a[i] != b[i]) {
            return "token mismatch at " + std::to_string(i) + ": \"" + a[i] + "\" vs \"" + b[i] +
                   "\"";
        }
    }
    return {};
}

}  // namespace oracle
