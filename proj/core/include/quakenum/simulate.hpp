#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace quakenum {

// Deterministic random source. Each (seed, stream) pair yields an independent
// substream; replication r of a study always uses stream r, so results are
// bit-identical no matter how replications are scheduled across threads.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    // Uniform double strictly inside (0, 1): 53-bit resolution, never 0 or 1,
    // so logarithms of draws are always finite.
    double uniform_open();

  private:
    std::mt19937_64 engine_;
};

// Geometric draw by inversion: ceil(ln R / ln(1 - theta)) - 1 for uniform
// R in (0,1), clamped to >= 0. Support {0, 1, 2, ...}, pmf theta(1-theta)^k.
// Throws std::domain_error unless 0 < theta < 1.
std::int64_t draw_geometric(double theta, Rng& rng);

// Negative binomial (Pascal) draw: the sum of tau independent geometric
// draws. tau must be a positive integer; real-valued shapes are not
// simulated. Throws std::domain_error on invalid parameters.
std::int64_t draw_nbd(double theta, std::int64_t tau, Rng& rng);

// Replication study configuration.
struct SimConfig {
    double theta = 0.0;            // in (0, 1)
    std::int64_t tau = 0;          // positive integer (Pascal shape)
    std::size_t n_intervals = 0;   // counts per replication, >= 1
    std::size_t replications = 0;  // >= 1
    std::uint64_t seed = 0;
    unsigned n_threads = 1;        // scheduling only; never affects results
    bool use_mle = false;          // fit by MLE instead of method of moments

    // Throws std::domain_error on any invalid field.
    void validate() const;
};

// Statistics recomputed from one simulated series. NBD-derived fields are
// absent when that replication came out under-dispersed (no moments fit);
// sample skewness/kurtosis are absent in the degenerate zero-variance case.
struct ReplicationEstimates {
    double lambda = 0.0;               // sample mean
    std::optional<double> theta_hat;   // fitted NBD success probability
    std::optional<double> tau_hat;     // fitted NBD shape
    std::optional<double> eta_s;       // sample skewness
    std::optional<double> psi_s;       // sample excess kurtosis
    std::optional<double> eta_n;       // NBD theoretical skewness at the fit
    std::optional<double> psi_n;       // NBD theoretical excess kurtosis
    std::optional<double> eta_p;       // Poisson theoretical skewness at lambda
    std::optional<double> psi_p;       // Poisson theoretical excess kurtosis
};

// Mean / sample standard deviation over the replications where a quantity
// was available (n of them). sd is NaN when n < 2; mean is NaN when n == 0.
struct SummaryStat {
    double mean;
    double sd;
    std::size_t n;
};

struct ReplicationReport {
    SimConfig config;
    std::vector<ReplicationEstimates> replications;  // length R, in order
    SummaryStat lambda{}, theta_hat{}, tau_hat{};
    SummaryStat eta_s{}, psi_s{}, eta_n{}, psi_n{}, eta_p{}, psi_p{};
    double rho_eta_psi = 0.0;          // Pearson correlation of (eta_s, psi_s)
    std::size_t n_underdispersed = 0;  // replications without an NBD fit
};

// Simulates `replications` series of `n_intervals` NBD counts, re-estimates
// parameters and moments from each, and summarizes. Bit-identical output for
// a given config regardless of n_threads.
ReplicationReport run_replication_study(const SimConfig& cfg);

// Approximate z-test of a simulated moment estimate against an observed one,
// using the simulation scatter as the only available scale.
struct ZResult {
    double z;        // (value_sim - value_obs) / sigma
    double p_value;  // two-sided Gaussian
};

// Throws std::domain_error unless sigma > 0 and all inputs are finite.
ZResult z_statistic(double value_sim, double value_obs, double sigma);

}  // namespace quakenum
