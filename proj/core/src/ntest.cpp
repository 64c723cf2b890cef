#include "quakenum/ntest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace quakenum {
namespace {

void check_level(double level) {
    if (!(level > 0.0) || !(level < 1.0)) {
        throw std::domain_error("confidence level must lie strictly in (0, 1)");
    }
}

void check_observed(std::int64_t observed) {
    if (observed < 0) {
        throw std::domain_error("observed count must be >= 0");
    }
}

// One cdf sweep serving both band endpoints: lower is the first k whose
// cumulative mass reaches (1-level)/2, upper the first reaching 1-(1-level)/2.
template <typename Pmf>
Band band_by_summation(double level, Reference ref, Pmf&& pmf, std::int64_t hard_stop) {
    check_level(level);
    const double q_lo = (1.0 - level) / 2.0;
    const double q_hi = 1.0 - q_lo;
    Band band;
    band.level = level;
    band.reference = ref;
    double cum = 0.0;
    bool have_lower = false;
    for (std::int64_t k = 0;; ++k) {
        cum += pmf(k);
        if (!have_lower && cum >= q_lo) {
            band.lower = k;
            have_lower = true;
        }
        if (cum >= q_hi) {
            band.upper = k;
            break;
        }
        if (k > hard_stop) {  // accumulated-rounding guard; see quantile()
            band.upper = k;
            if (!have_lower) band.lower = k;
            break;
        }
    }
    return band;
}

template <typename Cdf>
NumberTestResult verdict_from(std::int64_t observed, const Band& band, Cdf&& cdf_at) {
    NumberTestResult result;
    result.band = band;
    if (observed < band.lower) {
        result.verdict = Verdict::too_few;
    } else if (observed > band.upper) {
        result.verdict = Verdict::too_many;
    } else {
        result.verdict = Verdict::consistent;
    }
    const double lower_tail = cdf_at(observed);
    const double upper_tail = 1.0 - cdf_at(observed - 1);
    result.tail_probability = std::clamp(std::min(lower_tail, upper_tail), 0.0, 1.0);
    return result;
}

std::int64_t stop_bound(double mean, double sd) {
    return static_cast<std::int64_t>(mean + 200.0 * sd) + 1000;
}

}  // namespace

EmpiricalDist empirical_distribution(std::span<const std::int64_t> counts) {
    if (counts.empty()) {
        throw std::invalid_argument("empirical_distribution: empty series");
    }
    std::map<std::int64_t, std::int64_t> freq;
    for (const std::int64_t k : counts) {
        if (k < 0) throw std::domain_error("empirical_distribution: negative count");
        ++freq[k];
    }
    EmpiricalDist dist;
    dist.n_intervals = counts.size();
    dist.support.reserve(freq.size());
    dist.probabilities.reserve(freq.size());
    const double n = static_cast<double>(counts.size());
    for (const auto& [k, c] : freq) {
        dist.support.push_back(k);
        dist.probabilities.push_back(static_cast<double>(c) / n);
    }
    return dist;
}

EmpiricalDist empirical_distribution(const CountSeries& series) {
    return empirical_distribution(std::span<const std::int64_t>(series.counts));
}

EmpiricalDist smooth(const EmpiricalDist& dist, double bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw std::domain_error("smooth: bandwidth must be finite and > 0");
    }
    if (dist.smoothed) {
        throw std::invalid_argument("smooth: input is already smoothed");
    }
    if (dist.support.empty()) {
        throw std::invalid_argument("smooth: empty distribution");
    }
    // Kernel support is cut at 8 bandwidths (relative weight exp(-32), far
    // below the renormalization's resolution).
    const std::int64_t reach = static_cast<std::int64_t>(std::ceil(8.0 * bandwidth));
    const std::int64_t lo = std::max<std::int64_t>(0, dist.support.front() - reach);
    const std::int64_t hi = dist.support.back() + reach;
    if (hi - lo > 10'000'000) {
        throw std::invalid_argument("smooth: bandwidth/support span over 1e7 grid points");
    }

    const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    std::vector<double> mass(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::size_t j = 0; j < dist.support.size(); ++j) {
        const std::int64_t center = dist.support[j];
        const double p = dist.probabilities[j];
        const std::int64_t from = std::max(lo, center - reach);
        const std::int64_t to = std::min(hi, center + reach);
        for (std::int64_t k = from; k <= to; ++k) {
            const double d = static_cast<double>(k - center);
            mass[static_cast<std::size_t>(k - lo)] += p * std::exp(-d * d * inv_two_h2);
        }
    }
    double total = 0.0;
    for (const double m : mass) total += m;

    EmpiricalDist out;
    out.smoothed = true;
    out.bandwidth = bandwidth;
    out.n_intervals = dist.n_intervals;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] > 0.0) {
            out.support.push_back(lo + static_cast<std::int64_t>(i));
            out.probabilities.push_back(mass[i] / total);
        }
    }
    return out;
}

double silverman_bandwidth(const EmpiricalDist& dist) {
    if (dist.support.empty() || dist.n_intervals == 0) {
        throw std::invalid_argument(
            "silverman_bandwidth: needs a distribution with its sample size recorded");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
        mean += dist.probabilities[i] * static_cast<double>(dist.support[i]);
    }
    double var = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
        const double d = static_cast<double>(dist.support[i]) - mean;
        var += dist.probabilities[i] * d * d;
    }
    const double n = static_cast<double>(dist.n_intervals);
    if (dist.n_intervals >= 2) {
        var *= n / (n - 1.0);  // probability-weighted moment -> sample variance
    }
    const double h = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
    return std::max(h, 0.5);
}

EmpiricalDist smooth_auto(const EmpiricalDist& dist) {
    return smooth(dist, silverman_bandwidth(dist));
}

double empirical_cdf(const EmpiricalDist& dist, std::int64_t x) {
    double cum = 0.0;
    for (std::size_t i = 0; i < dist.support.size() && dist.support[i] <= x; ++i) {
        cum += dist.probabilities[i];
    }
    return cum < 1.0 ? cum : 1.0;
}

Band confidence_band(const PoissonParams& ref, double level) {
    return band_by_summation(level, Reference::poisson,
                             [&](std::int64_t k) { return poisson_pmf(k, ref); },
                             stop_bound(ref.lambda, std::sqrt(ref.lambda)));
}

Band confidence_band(const NbdParams& ref, double level) {
    const DistMoments m = theoretical_moments(ref);
    return band_by_summation(level, Reference::nbd,
                             [&](std::int64_t k) { return nbd_pmf(k, ref); },
                             stop_bound(m.mean, std::sqrt(m.variance)));
}

Band confidence_band(const EmpiricalDist& ref, double level) {
    check_level(level);
    const double q_lo = (1.0 - level) / 2.0;
    const double q_hi = 1.0 - q_lo;
    Band band;
    band.level = level;
    band.reference = Reference::empirical;
    double cum = 0.0;
    bool have_lower = false;
    band.lower = ref.support.back();
    band.upper = ref.support.back();
    for (std::size_t i = 0; i < ref.support.size(); ++i) {
        cum += ref.probabilities[i];
        if (!have_lower && cum >= q_lo) {
            band.lower = ref.support[i];
            have_lower = true;
        }
        if (cum >= q_hi) {
            band.upper = ref.support[i];
            break;
        }
    }
    return band;
}

NumberTestResult number_test(std::int64_t observed, const PoissonParams& ref, double level) {
    check_observed(observed);
    return verdict_from(observed, confidence_band(ref, level),
                        [&](std::int64_t k) { return cdf(k, ref); });
}

NumberTestResult number_test(std::int64_t observed, const NbdParams& ref, double level) {
    check_observed(observed);
    return verdict_from(observed, confidence_band(ref, level),
                        [&](std::int64_t k) { return cdf(k, ref); });
}

NumberTestResult number_test(std::int64_t observed, const EmpiricalDist& ref, double level) {
    check_observed(observed);
    return verdict_from(observed, confidence_band(ref, level),
                        [&](std::int64_t k) { return empirical_cdf(ref, k); });
}

}  // namespace quakenum
