#include "nhrmt/sampler.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace nhrmt;

TEST_CASE("log weight closed forms and symmetries") {
    LogGasConfig config;
    config.n_points = 2;
    config.k_exponent = 1;

    const std::vector<Complex> pair = {Complex(0, 0), Complex(1, 0)};
    CHECK(log_weight(config, pair) == doctest::Approx(-1.0).epsilon(1e-14));

    const std::vector<Complex> swapped = {Complex(1, 0), Complex(0, 0)};
    CHECK(log_weight(config, swapped) == log_weight(config, pair));

    // Global rotation invariance.
    const Complex phase = std::polar(1.0, 0.7);
    const std::vector<Complex> rotated = {phase * pair[0], phase * pair[1]};
    CHECK(log_weight(config, rotated) == doctest::Approx(log_weight(config, pair)).epsilon(1e-12));

    const std::vector<Complex> coincident = {Complex(1, 1), Complex(1, 1)};
    CHECK(log_weight(config, coincident) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("two-point chain reproduces the quadrature mean separation") {
    // For P ~ |z1 - z2|^2 exp(-|z1|^2 - |z2|^2), splitting into center-of-mass
    // and relative coordinates gives <|z1 - z2|^2> = 2 <|u|^2> with density
    // |u|^2 e^{-|u|^2}; the quadrature below evaluates it independently.
    const double numerator =
        oracles::simpson([](double r) { return r * r * r * r * r * std::exp(-r * r); }, 0.0,
                         12.0, 4000);
    const double denominator =
        oracles::simpson([](double r) { return r * r * r * std::exp(-r * r); }, 0.0, 12.0,
                         4000);
    const double oracle = 2.0 * numerator / denominator;

    LogGasConfig config;
    config.n_points = 2;
    config.k_exponent = 1;
    config.burn_in = 500;
    config.sweeps_per_sample = 20;
    config.seed = 7;
    LogGasChain chain(config);

    const int samples = 3000;
    double mean = 0.0, mean_sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Spectrum s = chain.next();
        const double sep = std::norm(s.eigenvalues[0] - s.eigenvalues[1]);
        mean += sep;
        mean_sq += sep * sep;
    }
    mean /= samples;
    mean_sq /= samples;
    const double stderr_mc = std::sqrt((mean_sq - mean * mean) / samples);
    // Samples are thinned but still weakly correlated; allow 5 nominal errors.
    CHECK(std::abs(mean - oracle) < 5.0 * stderr_mc);
}

TEST_CASE("chain diagnostics and determinism") {
    LogGasConfig config;
    config.n_points = 80;
    config.k_exponent = 2;
    config.burn_in = 300;
    config.sweeps_per_sample = 5;
    config.seed = 11;

    LogGasChain chain(config);
    const Spectrum first = chain.next();
    CHECK(first.eigenvalues.size() == 80);
    CHECK(first.source_tag == "loggas-k2");
    CHECK(chain.acceptance_rate() > 0.2);
    CHECK(chain.acceptance_rate() < 0.7);
    for (int i = 0; i < 25; ++i) chain.next();
    CHECK(chain.last_drift() < 1e-8);

    LogGasChain again(config);
    const Spectrum repeat = again.next();
    for (std::size_t i = 0; i < 80; ++i) {
        REQUIRE(repeat.eigenvalues[i] == first.eigenvalues[i]);
    }
}

TEST_CASE("support radius and rotational symmetry at k = 1") {
    LogGasConfig config;
    config.n_points = 300;
    config.k_exponent = 1;
    config.burn_in = 400;
    config.sweeps_per_sample = 10;
    config.seed = 13;
    const auto spectra = sample_log_gas_ensemble(config, 10);

    std::vector<double> moduli;
    std::vector<double> angles;
    for (const auto& s : spectra) {
        for (const Complex& z : s.eigenvalues) {
            moduli.push_back(std::abs(z));
            angles.push_back(std::arg(z) < 0 ? std::arg(z) + 2 * M_PI : std::arg(z));
        }
    }
    std::sort(moduli.begin(), moduli.end());
    const double q99 = moduli[static_cast<std::size_t>(0.99 * (moduli.size() - 1))];
    CHECK(q99 == doctest::Approx(config.support_radius()).epsilon(0.05));

    // Kolmogorov-Smirnov distance of the angle marginal from uniform; the
    // 1% critical value for n samples is 1.63/sqrt(n).
    std::sort(angles.begin(), angles.end());
    double ks = 0.0;
    const double n = static_cast<double>(angles.size());
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double cdf = angles[i] / (2.0 * M_PI);
        ks = std::max(ks, std::abs(cdf - (i + 1) / n));
        ks = std::max(ks, std::abs(cdf - i / n));
    }
    // Correlated samples inflate the effective KS statistic; stay below a
    // conservative multiple of the critical value.
    CHECK(ks < 3.0 * 1.63 / std::sqrt(n));
}

TEST_CASE("thinned samples decorrelate disc counts") {
    LogGasConfig config;
    config.n_points = 100;
    config.k_exponent = 1;
    config.burn_in = 300;
    config.sweeps_per_sample = 10;
    config.seed = 23;
    LogGasChain chain(config);

    // Count eigenvalues in a fixed bulk disc across consecutive samples and
    // check the lag-1 autocorrelation of the series.
    const Complex center(2.0, 1.0);
    const double radius = 2.0;
    const int samples = 400;
    std::vector<double> counts(samples);
    for (int i = 0; i < samples; ++i) {
        const Spectrum s = chain.next();
        long c = 0;
        for (const Complex& z : s.eigenvalues) c += std::abs(z - center) <= radius;
        counts[i] = static_cast<double>(c);
    }
    double mean = 0.0;
    for (double c : counts) mean += c;
    mean /= samples;
    double var = 0.0, cov = 0.0;
    for (int i = 0; i < samples; ++i) {
        var += (counts[i] - mean) * (counts[i] - mean);
        if (i > 0) cov += (counts[i] - mean) * (counts[i - 1] - mean);
    }
    REQUIRE(var > 0.0);
    CHECK(cov / var < 0.5);
}

TEST_CASE("bad proposal scales are reported after auto-tuning") {
    LogGasConfig config;
    config.n_points = 50;
    config.k_exponent = 1;
    config.burn_in = 40; // too short for the tuner to rescue the scale
    config.proposal_scale = 1e-7;
    config.seed = 17;
    CHECK_THROWS_AS(LogGasChain{config}, std::runtime_error);
}

TEST_CASE("config validation") {
    LogGasConfig config;
    config.n_points = 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.n_points = 10;
    config.k_exponent = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.k_exponent = 2;
    CHECK(config.support_radius() == doctest::Approx(std::pow(5.0, 0.25)));
}
