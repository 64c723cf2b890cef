#pragma once

#include <cstdint>

namespace quakenum {

// Poisson law with rate lambda (expected count per interval).
struct PoissonParams {
    double lambda;

    // Throws std::domain_error unless 0 < lambda < infinity.
    explicit PoissonParams(double lambda_);
};

// Negative binomial law with success probability theta in (0,1) and shape
// tau > 0 (real-valued; integer tau is the Pascal special case). The Poisson
// boundary theta -> 1 is deliberately not representable here: use
// PoissonParams for it.
struct NbdParams {
    double theta;
    double tau;

    // Throws std::domain_error unless 0 < theta < 1 and 0 < tau < infinity.
    NbdParams(double theta_, double tau_);

    double mean() const { return tau * (1.0 - theta) / theta; }
};

// Theoretical mean, variance, skewness, and EXCESS kurtosis (Gaussian = 0).
struct DistMoments {
    double mean;
    double variance;
    double skewness;
    double excess_kurtosis;
};

// Log-space probability mass functions. k < 0 yields -infinity (mass zero);
// all finite-k values are computed through log_gamma so that counts in the
// tens-of-thousands range neither overflow nor lose the tail.
double poisson_log_pmf(std::int64_t k, const PoissonParams& p);
double nbd_log_pmf(std::int64_t k, const NbdParams& p);

double poisson_pmf(std::int64_t k, const PoissonParams& p);
double nbd_pmf(std::int64_t k, const NbdParams& p);

// Cumulative sums of the pmf from 0 through k (0 for k < 0, clamped to 1).
double cdf(std::int64_t k, const PoissonParams& p);
double cdf(std::int64_t k, const NbdParams& p);

// Smallest k with cdf(k) >= q. Throws std::domain_error unless 0 < q < 1.
std::int64_t quantile(double q, const PoissonParams& p);
std::int64_t quantile(double q, const NbdParams& p);

// Closed-form moments:
//   Poisson: mean = var = lambda, skewness = 1/sqrt(lambda),
//            excess kurtosis = 1/lambda.
//   NBD:     mean = tau(1-theta)/theta, var = tau(1-theta)/theta^2,
//            skewness = (2-theta)/sqrt(tau(1-theta)),
//            excess kurtosis = 6/tau + theta^2/(tau(1-theta)).
DistMoments theoretical_moments(const PoissonParams& p);
DistMoments theoretical_moments(const NbdParams& p);

}  // namespace quakenum
