#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "quakenum/catalog.hpp"
#include "quakenum/dist.hpp"

namespace quakenum {

// Base class for estimation failures.
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The series shows no overdispersion, so no negative binomial law fits:
// variance <= mean means the two-moment system has no solution and the
// likelihood is maximized in the Poisson limit. `poisson_consistent` tells
// callers the natural fallback (always true for this error; kept explicit so
// call sites read sensibly).
struct UnderdispersedError : EstimationError {
    double mean;
    double variance;
    bool poisson_consistent;

    UnderdispersedError(std::string message, double mean_, double variance_)
        : EstimationError(std::move(message)),
          mean(mean_),
          variance(variance_),
          poisson_consistent(variance_ <= mean_) {}
};

// The series carries no usable signal (e.g. every count is zero).
struct DegenerateSeriesError : EstimationError {
    using EstimationError::EstimationError;
};

// The likelihood optimizer failed to settle (NaN likelihood or exhausted
// iteration budget). Practically unreachable for valid inputs.
struct ConvergenceError : EstimationError {
    using EstimationError::EstimationError;
};

// Sample statistics of a count series. Skewness and excess kurtosis use the
// biased (1/N) central-moment estimators g1, g2; the variance uses the N-1
// divisor. Fields are absent when undefined: variance needs N >= 2, skewness
// needs N >= 3 and positive variance, kurtosis needs N >= 4 and positive
// variance.
struct MomentSummary {
    std::size_t n_intervals = 0;
    double mean = 0.0;
    std::optional<double> variance;
    std::optional<double> skewness;
    std::optional<double> excess_kurtosis;
};

MomentSummary sample_moments(std::span<const std::int64_t> counts);
MomentSummary sample_moments(const CountSeries& series);

enum class FitMethod { moments, mle };

struct PoissonFit {
    PoissonParams params;
    double log_likelihood;  // total over intervals, natural log
};

struct NbdFit {
    NbdParams params;
    double log_likelihood;  // total over intervals, natural log
    FitMethod method;
};

// lambda-hat = sample mean (the maximum-likelihood estimate);
// log-likelihood evaluated at it. Throws DegenerateSeriesError when every
// count is zero and EstimationError on an empty series.
PoissonFit fit_poisson(std::span<const std::int64_t> counts);

// Method of moments: theta = mean/variance, tau = mean^2/(variance - mean).
// Throws UnderdispersedError when variance <= mean, std::domain_error when
// mean <= 0 or inputs are not finite.
NbdParams fit_nbd_moments(double mean, double variance);

// Maximum likelihood over the profile theta(tau) = tau/(tau + mean): a log
// grid over tau in [1e-6, 1e8] followed by golden-section refinement to 1e-10
// relative. The MLE exists iff the biased (1/N) variance exceeds the mean;
// otherwise the supremum sits at the Poisson boundary tau -> infinity and an
// UnderdispersedError is thrown (even in the narrow band where the N-1
// variance is still above the mean). Guaranteed to return a likelihood at
// least as high as the method-of-moments parameter point.
NbdFit fit_nbd_mle(std::span<const std::int64_t> counts);

// Log-likelihood helpers (totals in nats) shared by fits, tests, and the CLI.
double poisson_log_likelihood(std::span<const std::int64_t> counts, const PoissonParams& p);
double nbd_log_likelihood(std::span<const std::int64_t> counts, const NbdParams& p);

// Upper-tail p-value of the chi-square law with one degree of freedom,
// 2 * (1 - Phi(sqrt(x))). Throws std::domain_error for x < 0.
double chi2_pvalue(double x);

// Likelihood-ratio test of Poisson (null) against NBD (alternative).
struct LrTestResult {
    PoissonFit poisson;       // null fit (lambda = mean)
    NbdFit nbd;               // alternative fit (MLE)
    double statistic;         // 2 * (ell_nbd - ell_poisson), >= 0
    double p_value;           // chi2_pvalue(statistic)
    bool reject;              // p_value < 1 - confidence_level
    double confidence_level;  // rejection threshold used (default 0.95)
};

// The statistic is accumulated from per-count log-pmf DIFFERENCES, so the
// k! terms cancel exactly and the result stays accurate even when the two
// totals are billions in magnitude; it can differ from
// 2*(nbd.log_likelihood - poisson.log_likelihood) by rounding at that scale.
// Throws whatever the underlying fits throw, plus std::domain_error for a
// confidence level outside (0, 1).
LrTestResult lr_test(std::span<const std::int64_t> counts, double confidence_level = 0.95);
LrTestResult lr_test(const CountSeries& series, double confidence_level = 0.95);

}  // namespace quakenum
