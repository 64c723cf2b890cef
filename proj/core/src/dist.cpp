#include "quakenum/dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "quakenum/special.hpp"

namespace quakenum {
namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

void check_quantile_arg(double q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw std::domain_error("quantile: probability must lie strictly in (0, 1)");
    }
}

// Shared cdf / quantile drivers over a log-pmf callable. Terms are summed in
// natural order; each is exp() of a log value, so large-mean laws cost O(k)
// but never overflow.
template <typename LogPmf>
double cdf_impl(std::int64_t k, LogPmf&& log_pmf) {
    if (k < 0) return 0.0;
    double sum = 0.0;
    for (std::int64_t i = 0; i <= k; ++i) {
        sum += std::exp(log_pmf(i));
    }
    return sum < 1.0 ? sum : 1.0;
}

template <typename LogPmf>
std::int64_t quantile_impl(double q, double mean, double stddev, LogPmf&& log_pmf) {
    check_quantile_arg(q);
    // Past this point the remaining mass is far below any representable q gap;
    // stopping there guards against an accumulated-rounding infinite loop.
    const std::int64_t hard_stop =
        static_cast<std::int64_t>(mean + 200.0 * stddev) + 1000;
    double cum = 0.0;
    for (std::int64_t k = 0;; ++k) {
        cum += std::exp(log_pmf(k));
        if (cum >= q) return k;
        if (k > hard_stop) return k;
    }
}

}  // namespace

PoissonParams::PoissonParams(double lambda_) : lambda(lambda_) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("PoissonParams: lambda must be finite and > 0");
    }
}

NbdParams::NbdParams(double theta_, double tau_) : theta(theta_), tau(tau_) {
    if (!(theta > 0.0) || !(theta < 1.0)) {
        throw std::domain_error("NbdParams: theta must lie strictly in (0, 1)");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::domain_error("NbdParams: tau must be finite and > 0");
    }
}

double poisson_log_pmf(std::int64_t k, const PoissonParams& p) {
    if (k < 0) return neg_inf;
    const double kd = static_cast<double>(k);
    return kd * std::log(p.lambda) - p.lambda - log_gamma(kd + 1.0);
}

double nbd_log_pmf(std::int64_t k, const NbdParams& p) {
    if (k < 0) return neg_inf;
    const double kd = static_cast<double>(k);
    return log_gamma_ratio(p.tau, kd) - log_gamma(kd + 1.0) +
           p.tau * std::log(p.theta) + kd * std::log1p(-p.theta);
}

double poisson_pmf(std::int64_t k, const PoissonParams& p) {
    return k < 0 ? 0.0 : std::exp(poisson_log_pmf(k, p));
}

double nbd_pmf(std::int64_t k, const NbdParams& p) {
    return k < 0 ? 0.0 : std::exp(nbd_log_pmf(k, p));
}

double cdf(std::int64_t k, const PoissonParams& p) {
    return cdf_impl(k, [&](std::int64_t i) { return poisson_log_pmf(i, p); });
}

double cdf(std::int64_t k, const NbdParams& p) {
    return cdf_impl(k, [&](std::int64_t i) { return nbd_log_pmf(i, p); });
}

std::int64_t quantile(double q, const PoissonParams& p) {
    return quantile_impl(q, p.lambda, std::sqrt(p.lambda),
                         [&](std::int64_t i) { return poisson_log_pmf(i, p); });
}

std::int64_t quantile(double q, const NbdParams& p) {
    const DistMoments m = theoretical_moments(p);
    return quantile_impl(q, m.mean, std::sqrt(m.variance),
                         [&](std::int64_t i) { return nbd_log_pmf(i, p); });
}

DistMoments theoretical_moments(const PoissonParams& p) {
    return {p.lambda, p.lambda, 1.0 / std::sqrt(p.lambda), 1.0 / p.lambda};
}

DistMoments theoretical_moments(const NbdParams& p) {
    const double one_minus = 1.0 - p.theta;
    const double mean = p.tau * one_minus / p.theta;
    const double variance = mean / p.theta;
    const double skewness = (2.0 - p.theta) / std::sqrt(p.tau * one_minus);
    const double excess = 6.0 / p.tau + p.theta * p.theta / (p.tau * one_minus);
    return {mean, variance, skewness, excess};
}

}  // namespace quakenum
