#pragma once

// Metropolis Monte Carlo for the normal-matrix eigenvalue distribution
// P(z_1..z_N) ~ prod |z_j - z_k|^2 exp(-sum |z_l|^2k): single-point Gaussian
// proposals, incremental log-weight updates, proposal scale auto-tuned during
// burn-in toward 0.4 acceptance.

#include "nhrmt/rng.hpp"
#include "nhrmt/spectra.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nhrmt {

struct LogGasConfig {
    int n_points = 500;
    int k_exponent = 1;          // potential V = |z|^2k
    int sweeps_per_sample = 10;  // thinning interval
    int burn_in = 1000;          // sweeps
    double proposal_scale = 0.0; // 0 = auto (support radius / sqrt(N))
    std::uint64_t seed = 0;

    double support_radius() const; // (N/k)^(1/2k)
    void validate() const;
};

// sum_{j<k} 2 ln|z_j - z_k| - sum_l |z_l|^2k; -inf for coincident points.
double log_weight(const LogGasConfig& config, std::span<const Complex> positions);

class LogGasChain {
public:
    explicit LogGasChain(const LogGasConfig& config);

    // Advances one thinning interval and returns a snapshot Spectrum.
    Spectrum next();

    double acceptance_rate() const;   // since burn-in
    double proposal_scale() const { return scale_; }
    // Gap between the running log weight and a fresh full recomputation at
    // the last resync (drift of the incremental updates).
    double last_drift() const { return last_drift_; }

private:
    void sweep();
    double move_delta(int i, Complex z_new) const;

    LogGasConfig config_;
    rng::Stream stream_;
    std::vector<Complex> z_;
    double log_w_ = 0.0;
    double scale_ = 0.0;
    double last_drift_ = 0.0;
    long proposals_ = 0, accepted_ = 0;
    long window_proposals_ = 0, window_accepted_ = 0;
    long sweeps_done_ = 0, samples_emitted_ = 0;
};

// Burn-in plus one emitted configuration.
Spectrum sample_log_gas(const LogGasConfig& config);

// One chain, n_samples configurations at the thinning interval.
std::vector<Spectrum> sample_log_gas_ensemble(const LogGasConfig& config, int n_samples);

} // namespace nhrmt
