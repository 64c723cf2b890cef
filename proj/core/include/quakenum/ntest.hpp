#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "quakenum/catalog.hpp"
#include "quakenum/dist.hpp"

namespace quakenum {

// A probability distribution over non-negative integer counts, either the raw
// frequencies of a series or a smoothed version of them.
struct EmpiricalDist {
    std::vector<std::int64_t> support;  // sorted, distinct, >= 0
    std::vector<double> probabilities;  // same length, each > 0, sum == 1
    bool smoothed = false;
    std::optional<double> bandwidth;    // present iff smoothed
    // Number of observations behind the distribution; drives the automatic
    // bandwidth rule (not part of the distribution itself).
    std::size_t n_intervals = 0;
};

// Relative frequencies of the observed counts (unsmoothed).
EmpiricalDist empirical_distribution(std::span<const std::int64_t> counts);
EmpiricalDist empirical_distribution(const CountSeries& series);

// Discrete Gaussian-kernel smoothing over the non-negative integers:
//   mass'(k)  proportional to  sum_j mass(j) * exp(-(k-j)^2 / (2 h^2)),
// renormalized to sum 1 (mass the kernel pushes below zero is removed by the
// renormalization, not reflected). Throws std::domain_error for bandwidth
// <= 0 and std::invalid_argument when the input is already smoothed.
EmpiricalDist smooth(const EmpiricalDist& dist, double bandwidth);

// Automatic bandwidth: h = 1.06 * s * N^(-1/5) (s = sample standard
// deviation, N = n_intervals), floored at 0.5 so single-value series still
// spread. The floor applies only to this rule, never to explicit bandwidths.
double silverman_bandwidth(const EmpiricalDist& dist);
EmpiricalDist smooth_auto(const EmpiricalDist& dist);

// P(X <= x) under the empirical distribution.
double empirical_cdf(const EmpiricalDist& dist, std::int64_t x);

enum class Reference { poisson, nbd, empirical };

// Equal-tail confidence band: [quantile((1-level)/2), quantile(1-(1-level)/2)].
struct Band {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    double level = 0.0;
    Reference reference = Reference::poisson;
};

// Throws std::domain_error unless 0 < level < 1.
Band confidence_band(const PoissonParams& ref, double level);
Band confidence_band(const NbdParams& ref, double level);
Band confidence_band(const EmpiricalDist& ref, double level);

enum class Verdict { consistent, too_few, too_many };

// Band membership (endpoints inclusive) plus the tail probability
// min(CDF(observed), 1 - CDF(observed - 1)) of the observed count.
struct NumberTestResult {
    Verdict verdict;
    double tail_probability;
    Band band;
};

// Throws std::domain_error for observed < 0 or level outside (0, 1).
NumberTestResult number_test(std::int64_t observed, const PoissonParams& ref, double level);
NumberTestResult number_test(std::int64_t observed, const NbdParams& ref, double level);
NumberTestResult number_test(std::int64_t observed, const EmpiricalDist& ref, double level);

}  // namespace quakenum
