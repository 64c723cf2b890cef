#include "quakenum/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "quakenum/special.hpp"

namespace quakenum {
namespace {

// Count multiplicities, ordered by count value so every downstream summation
// has a fixed order (bit-reproducible across platforms and thread counts).
std::map<std::int64_t, std::int64_t> histogram(std::span<const std::int64_t> counts) {
    std::map<std::int64_t, std::int64_t> h;
    for (const std::int64_t k : counts) {
        if (k < 0) throw std::domain_error("counts must be non-negative");
        ++h[k];
    }
    return h;
}

struct ProfileData {
    std::map<std::int64_t, std::int64_t> hist;
    double mean = 0.0;
    std::size_t n = 0;
    std::vector<double> log_factorial;  // log(k!) per distinct k, in hist order
};

// Profile log-likelihood at shape tau with theta eliminated by the
// first-moment condition theta = tau / (tau + mean).
double profile_loglik(const ProfileData& d, double tau) {
    const double mean = d.mean;
    const double log_theta = std::log(tau) - std::log(tau + mean);
    const double log_one_minus = std::log(mean) - std::log(tau + mean);
    long double total = 0.0L;
    std::size_t i = 0;
    for (const auto& [k, nk] : d.hist) {
        const double kd = static_cast<double>(k);
        const double term = log_gamma_ratio(tau, kd) - d.log_factorial[i] +
                            tau * log_theta + kd * log_one_minus;
        total += static_cast<long double>(nk) * term;
        ++i;
    }
    return static_cast<double>(total);
}

}  // namespace

MomentSummary sample_moments(std::span<const std::int64_t> counts) {
    const std::size_t n = counts.size();
    if (n == 0) throw EstimationError("sample_moments: empty series");

    long double sum = 0.0L;
    for (const std::int64_t k : counts) sum += static_cast<long double>(k);
    const double mean = static_cast<double>(sum / static_cast<long double>(n));

    MomentSummary out;
    out.n_intervals = n;
    out.mean = mean;
    if (n < 2) return out;

    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
    for (const std::int64_t k : counts) {
        const long double d = static_cast<long double>(k) - mean;
        const long double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    out.variance = static_cast<double>(m2 / static_cast<long double>(n - 1));
    const long double nl = static_cast<long double>(n);
    const long double b2 = m2 / nl;  // biased second central moment
    if (b2 > 0.0L) {
        if (n >= 3) {
            out.skewness = static_cast<double>((m3 / nl) / std::pow(b2, 1.5L));
        }
        if (n >= 4) {
            out.excess_kurtosis = static_cast<double>((m4 / nl) / (b2 * b2) - 3.0L);
        }
    }
    return out;
}

MomentSummary sample_moments(const CountSeries& series) {
    return sample_moments(std::span<const std::int64_t>(series.counts));
}

double poisson_log_likelihood(std::span<const std::int64_t> counts, const PoissonParams& p) {
    long double total = 0.0L;
    for (const auto& [k, nk] : histogram(counts)) {
        total += static_cast<long double>(nk) * poisson_log_pmf(k, p);
    }
    return static_cast<double>(total);
}

double nbd_log_likelihood(std::span<const std::int64_t> counts, const NbdParams& p) {
    long double total = 0.0L;
    for (const auto& [k, nk] : histogram(counts)) {
        total += static_cast<long double>(nk) * nbd_log_pmf(k, p);
    }
    return static_cast<double>(total);
}

PoissonFit fit_poisson(std::span<const std::int64_t> counts) {
    const MomentSummary m = sample_moments(counts);
    if (m.mean <= 0.0) {
        throw DegenerateSeriesError(
            "fit_poisson: every count is zero, so no positive rate fits");
    }
    const PoissonParams params(m.mean);
    return {params, poisson_log_likelihood(counts, params)};
}

NbdParams fit_nbd_moments(double mean, double variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance)) {
        throw std::domain_error("fit_nbd_moments: moments must be finite");
    }
    if (mean <= 0.0) {
        throw std::domain_error("fit_nbd_moments: mean must be > 0");
    }
    if (variance <= mean) {
        const char* why = variance == mean
                              ? "variance equals mean (equidispersed)"
                              : "variance does not exceed mean";
        throw UnderdispersedError(std::string("fit_nbd_moments: ") + why +
                                      "; the series is Poisson-consistent and no negative "
                                      "binomial law matches its first two moments",
                                  mean, variance);
    }
    return NbdParams(mean / variance, mean * mean / (variance - mean));
}

NbdFit fit_nbd_mle(std::span<const std::int64_t> counts) {
    if (counts.size() < 2) {
        throw EstimationError("fit_nbd_mle: need at least two intervals");
    }
    const MomentSummary m = sample_moments(counts);
    if (m.mean <= 0.0) {
        throw DegenerateSeriesError("fit_nbd_mle: every count is zero");
    }
    const double n = static_cast<double>(counts.size());
    const double biased_variance = *m.variance * (n - 1.0) / n;
    if (biased_variance <= m.mean) {
        throw UnderdispersedError(
            "fit_nbd_mle: the biased (1/N) sample variance does not exceed the mean, so the "
            "likelihood is maximized only in the Poisson limit tau -> infinity; fit a Poisson "
            "law instead",
            m.mean, *m.variance);
    }

    ProfileData data;
    data.hist = histogram(counts);
    data.mean = m.mean;
    data.n = counts.size();
    data.log_factorial.reserve(data.hist.size());
    for (const auto& [k, nk] : data.hist) {
        (void)nk;
        data.log_factorial.push_back(log_gamma(static_cast<double>(k) + 1.0));
    }

    constexpr double tau_lo = 1e-6;
    constexpr double tau_hi = 1e8;
    const double u_lo = std::log(tau_lo);
    const double u_hi = std::log(tau_hi);

    double best_u = 0.0;
    double best_f = -std::numeric_limits<double>::infinity();
    const auto eval = [&](double u) {
        const double f = profile_loglik(data, std::exp(u));
        if (std::isnan(f)) {
            throw ConvergenceError("fit_nbd_mle: likelihood evaluated to NaN");
        }
        if (f > best_f) {
            best_f = f;
            best_u = u;
        }
        return f;
    };

    // Coarse scan: 33 log-spaced shapes plus the method-of-moments point.
    constexpr int grid_points = 33;
    std::vector<double> grid_u(grid_points);
    std::vector<double> grid_f(grid_points);
    int best_idx = 0;
    for (int j = 0; j < grid_points; ++j) {
        grid_u[j] = u_lo + (u_hi - u_lo) * static_cast<double>(j) / (grid_points - 1);
        grid_f[j] = eval(grid_u[j]);
        if (grid_f[j] > grid_f[best_idx]) best_idx = j;
    }
    if (*m.variance > m.mean) {
        const double tau_mom = m.mean * m.mean / (*m.variance - m.mean);
        eval(std::clamp(std::log(tau_mom), u_lo, u_hi));
    }

    // Golden-section refinement on log(tau) inside the bracketing grid cell.
    const double lo = grid_u[std::max(best_idx - 1, 0)];
    const double hi = grid_u[std::min(best_idx + 1, grid_points - 1)];
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    int budget = 300;
    // 1e-10 on log(tau) is 1e-10 relative on tau itself.
    while (b - a > 1e-10 && budget-- > 0) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        }
    }
    if (budget <= 0) {
        throw ConvergenceError("fit_nbd_mle: golden-section search exhausted its budget");
    }

    const double tau_hat = std::exp(best_u);
    const double theta_hat = tau_hat / (tau_hat + m.mean);
    return {NbdParams(theta_hat, tau_hat), best_f, FitMethod::mle};
}

double chi2_pvalue(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::domain_error("chi2_pvalue: statistic must be finite and >= 0");
    }
    return chi2_tail_1dof(x);
}

LrTestResult lr_test(std::span<const std::int64_t> counts, double confidence_level) {
    if (!(confidence_level > 0.0) || !(confidence_level < 1.0)) {
        throw std::domain_error("lr_test: confidence level must lie strictly in (0, 1)");
    }
    PoissonFit poisson = fit_poisson(counts);
    NbdFit nbd = fit_nbd_mle(counts);

    // Per-count difference of log-pmfs: the log k! terms cancel exactly, so
    // the statistic keeps full precision even when the totals are huge.
    long double diff = 0.0L;
    for (const auto& [k, nk] : histogram(counts)) {
        diff += static_cast<long double>(nk) *
                (nbd_log_pmf(k, nbd.params) - poisson_log_pmf(k, poisson.params));
    }
    double statistic = 2.0 * static_cast<double>(diff);
    if (statistic < 0.0) {
        if (statistic < -1e-6) {
            throw EstimationError(
                "lr_test: alternative likelihood fell below the null by more than rounding "
                "allows (statistic " +
                std::to_string(statistic) + ")");
        }
        statistic = 0.0;  // clamp optimizer/rounding fuzz
    }
    const double p = chi2_pvalue(statistic);
    return {std::move(poisson), std::move(nbd), statistic, p,
            p < 1.0 - confidence_level, confidence_level};
}

LrTestResult lr_test(const CountSeries& series, double confidence_level) {
    return lr_test(std::span<const std::int64_t>(series.counts), confidence_level);
}

}  // namespace quakenum
