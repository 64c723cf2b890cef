#include "quakenum/simulate.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "quakenum/dist.hpp"
#include "quakenum/estimate.hpp"
#include "quakenum/special.hpp"

namespace quakenum {
namespace {

// splitmix64 finalizer: bijective 64-bit mixing.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = mix64(seed + 0x9E3779B97F4A7C15ULL);
    const std::uint64_t b = mix64(stream + 0xD1B54A32D192ED03ULL);
    return mix64(a ^ b);
}

struct Accumulator {
    long double sum = 0.0L;
    long double sum_sq = 0.0L;
    std::size_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += static_cast<long double>(x) * x;
        ++n;
    }
    void add(const std::optional<double>& x) {
        if (x) add(*x);
    }
    SummaryStat finish() const {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        if (n == 0) return {nan, nan, 0};
        const long double mean = sum / static_cast<long double>(n);
        if (n == 1) return {static_cast<double>(mean), nan, 1};
        long double var = (sum_sq - static_cast<long double>(n) * mean * mean) /
                          static_cast<long double>(n - 1);
        if (var < 0.0L) var = 0.0L;  // rounding guard
        return {static_cast<double>(mean), static_cast<double>(std::sqrt(static_cast<double>(var))),
                n};
    }
};

ReplicationEstimates estimate_one(const SimConfig& cfg, std::uint64_t rep) {
    Rng rng(cfg.seed, rep);
    std::vector<std::int64_t> counts(cfg.n_intervals);
    for (auto& c : counts) c = draw_nbd(cfg.theta, cfg.tau, rng);

    const MomentSummary m = sample_moments(counts);
    ReplicationEstimates est;
    est.lambda = m.mean;
    est.eta_s = m.skewness;
    est.psi_s = m.excess_kurtosis;
    if (m.mean > 0.0) {
        const DistMoments pm = theoretical_moments(PoissonParams(m.mean));
        est.eta_p = pm.skewness;
        est.psi_p = pm.excess_kurtosis;
    }
    if (m.mean > 0.0 && m.variance) {
        try {
            NbdParams params = cfg.use_mle ? fit_nbd_mle(counts).params
                                           : fit_nbd_moments(m.mean, *m.variance);
            est.theta_hat = params.theta;
            est.tau_hat = params.tau;
            const DistMoments nm = theoretical_moments(params);
            est.eta_n = nm.skewness;
            est.psi_n = nm.excess_kurtosis;
        } catch (const EstimationError&) {
            // Under-dispersed replication: NBD fields stay absent.
        }
    }
    return est;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(substream_seed(seed, stream)) {}

double Rng::uniform_open() {
    // 53 high bits, centered inside the unit interval: [2^-54, 1 - 2^-54].
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::int64_t draw_geometric(double theta, Rng& rng) {
    if (!(theta > 0.0) || !(theta < 1.0)) {
        throw std::domain_error("draw_geometric: theta must lie strictly in (0, 1)");
    }
    const double r = rng.uniform_open();
    // Inversion of the geometric tail; R in (0,1) keeps the ratio finite and
    // positive, and the final clamp guards the ratio==integer edge.
    const double value = std::ceil(std::log(r) / std::log1p(-theta)) - 1.0;
    if (value <= 0.0) return 0;
    return static_cast<std::int64_t>(value);
}

std::int64_t draw_nbd(double theta, std::int64_t tau, Rng& rng) {
    if (tau < 1) {
        throw std::domain_error("draw_nbd: tau must be a positive integer");
    }
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < tau; ++i) {
        total += draw_geometric(theta, rng);
    }
    return total;
}

void SimConfig::validate() const {
    if (!(theta > 0.0) || !(theta < 1.0)) {
        throw std::domain_error("SimConfig: theta must lie strictly in (0, 1)");
    }
    if (tau < 1) throw std::domain_error("SimConfig: tau must be a positive integer");
    if (n_intervals < 1) throw std::domain_error("SimConfig: need at least one interval");
    if (replications < 1) throw std::domain_error("SimConfig: need at least one replication");
    if (n_threads < 1) throw std::domain_error("SimConfig: need at least one thread");
}

ReplicationReport run_replication_study(const SimConfig& cfg) {
    cfg.validate();
    ReplicationReport report;
    report.config = cfg;
    report.replications.resize(cfg.replications);

    const std::size_t workers =
        std::min<std::size_t>(cfg.n_threads, cfg.replications);
    if (workers <= 1) {
        for (std::size_t r = 0; r < cfg.replications; ++r) {
            report.replications[r] = estimate_one(cfg, r);
        }
    } else {
        // Strided assignment; each replication seeds its own substream, so
        // the partition has no effect on the numbers.
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> failures(workers);
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t r = w; r < cfg.replications; r += workers) {
                        report.replications[r] = estimate_one(cfg, r);
                    }
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& failure : failures) {
            if (failure) std::rethrow_exception(failure);
        }
    }

    Accumulator lambda, theta_hat, tau_hat, eta_s, psi_s, eta_n, psi_n, eta_p, psi_p;
    long double sx = 0.0L, sy = 0.0L, sxx = 0.0L, syy = 0.0L, sxy = 0.0L;
    std::size_t n_pairs = 0;
    for (const ReplicationEstimates& est : report.replications) {
        lambda.add(est.lambda);
        theta_hat.add(est.theta_hat);
        tau_hat.add(est.tau_hat);
        eta_s.add(est.eta_s);
        psi_s.add(est.psi_s);
        eta_n.add(est.eta_n);
        psi_n.add(est.psi_n);
        eta_p.add(est.eta_p);
        psi_p.add(est.psi_p);
        if (!est.theta_hat) ++report.n_underdispersed;
        if (est.eta_s && est.psi_s) {
            const long double x = *est.eta_s, y = *est.psi_s;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            ++n_pairs;
        }
    }
    report.lambda = lambda.finish();
    report.theta_hat = theta_hat.finish();
    report.tau_hat = tau_hat.finish();
    report.eta_s = eta_s.finish();
    report.psi_s = psi_s.finish();
    report.eta_n = eta_n.finish();
    report.psi_n = psi_n.finish();
    report.eta_p = eta_p.finish();
    report.psi_p = psi_p.finish();

    if (n_pairs >= 2) {
        const long double np = static_cast<long double>(n_pairs);
        const long double cov = sxy - sx * sy / np;
        const long double vx = sxx - sx * sx / np;
        const long double vy = syy - sy * sy / np;
        report.rho_eta_psi = (vx > 0.0L && vy > 0.0L)
                                 ? static_cast<double>(cov / std::sqrt(static_cast<double>(vx) *
                                                                       static_cast<double>(vy)))
                                 : std::numeric_limits<double>::quiet_NaN();
    } else {
        report.rho_eta_psi = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

ZResult z_statistic(double value_sim, double value_obs, double sigma) {
    if (!std::isfinite(value_sim) || !std::isfinite(value_obs)) {
        throw std::domain_error("z_statistic: values must be finite");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::domain_error("z_statistic: sigma must be finite and > 0");
    }
    const double z = (value_sim - value_obs) / sigma;
    return {z, 2.0 * normal_sf(std::fabs(z))};
}

}  // namespace quakenum
