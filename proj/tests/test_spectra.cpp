#include "nhrmt/spectra.hpp"

#include "nhrmt/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace nhrmt;

namespace {

Spectrum make_spectrum(std::vector<Complex> values, std::string tag = "test") {
    Spectrum s;
    s.eigenvalues = std::move(values);
    s.source_tag = std::move(tag);
    s.params_digest = "test;digest";
    s.seed = 42;
    return s;
}

// members * n points uniform in a disc of radius sqrt(n): density 1/pi.
std::vector<Spectrum> uniform_disc_ensemble(int members, int n, std::uint64_t seed) {
    rng::Stream stream(seed);
    const double radius = std::sqrt(static_cast<double>(n));
    std::vector<Spectrum> out;
    for (int m = 0; m < members; ++m) {
        std::vector<Complex> pts(n);
        for (auto& p : pts) {
            p = std::polar(radius * std::sqrt(stream.uniform()),
                           stream.uniform(0.0, 2.0 * M_PI));
        }
        out.push_back(make_spectrum(std::move(pts), "uniform"));
    }
    return out;
}

} // namespace

TEST_CASE("dedup_kramers") {
    const Complex z{0.3, 0.4}, w{-1.0, 2.0};

    SUBCASE("exact duplicates collapse") {
        const Spectrum s = make_spectrum({z, w, z, w});
        const Spectrum d = dedup_kramers(s, 1e-8);
        REQUIRE(d.eigenvalues.size() == 2);
        CHECK(d.dedup_applied);
        CHECK(((d.eigenvalues[0] == z && d.eigenvalues[1] == w) ||
               (d.eigenvalues[0] == w && d.eigenvalues[1] == z)));
    }

    SUBCASE("idempotent") {
        const Spectrum once = dedup_kramers(make_spectrum({z, w, z, w}), 1e-8);
        const Spectrum twice = dedup_kramers(once, 1e-8);
        CHECK(twice.eigenvalues == once.eigenvalues);
    }

    SUBCASE("non-degenerate input is rejected") {
        const Spectrum s = make_spectrum({z, w, Complex(5.0, 0.0), Complex(0.0, -7.0)});
        CHECK_THROWS_AS(dedup_kramers(s, 1e-8), std::runtime_error);
    }

    SUBCASE("odd count is rejected") {
        CHECK_THROWS_AS(dedup_kramers(make_spectrum({z, w, z}), 1e-8), std::invalid_argument);
    }

    SUBCASE("default tolerance is a millionth of the median modulus") {
        const Spectrum s = make_spectrum({Complex(1.0, 0.0), Complex(0.0, 2.0),
                                          Complex(3.0, 0.0), Complex(0.0, 4.0)});
        CHECK(default_kramers_tol(s) == doctest::Approx(3e-6).epsilon(1e-6));
    }
}

TEST_CASE("trim") {
    const Spectrum s = make_spectrum({Complex(0.5, 0.0), Complex(1.5, 0.0), Complex(3.0, 0.0),
                                      Complex(0.0, 2.0)});

    SUBCASE("keeps the window and records it") {
        const Spectrum t = trim(s, 1.0, 2.5);
        REQUIRE(t.eigenvalues.size() == 2);
        CHECK(t.trim_window->first == 1.0);
        CHECK(t.trim_window->second == 2.5);
    }

    SUBCASE("no inner trim at r_min = 0") {
        CHECK(trim(s, 0.0, 10.0).eigenvalues.size() == 4);
    }

    SUBCASE("nested trims intersect") {
        const Spectrum a = trim(trim(s, 0.5, 2.6), 1.0, 10.0);
        const Spectrum b = trim(s, 1.0, 2.6);
        CHECK(a.eigenvalues == b.eigenvalues);
        CHECK(a.trim_window == b.trim_window);
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(trim(s, 2.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(trim(s, 100.0, 200.0), std::runtime_error);
    }
}

TEST_CASE("radial density fit recovers a uniform disc") {
    const auto ensemble = uniform_disc_ensemble(100, 400, 7);
    const RadialDensityModel model = fit_radial_density(ensemble, 8);
    const double radius = std::sqrt(400.0);
    for (double f = 0.15; f <= 0.9; f += 0.05) {
        CHECK(model(f * radius) == doctest::Approx(1.0 / M_PI).epsilon(0.02));
    }
    CHECK(model.normalization_integral() == doctest::Approx(400.0).epsilon(0.01));
    CHECK(model.total_count() == doctest::Approx(400.0));
}

TEST_CASE("radial density fit recovers the k = 2 power law") {
    // Inverse CDF of R1 ~ r^2: r = R u^(1/4), R = (N/k)^(1/(2k)).
    const int n = 500, members = 100;
    const double radius = std::pow(n / 2.0, 0.25);
    rng::Stream stream(11);
    std::vector<Spectrum> ensemble;
    for (int m = 0; m < members; ++m) {
        std::vector<Complex> pts(n);
        for (auto& p : pts) {
            p = std::polar(radius * std::pow(stream.uniform_open(), 0.25),
                           stream.uniform(0.0, 2.0 * M_PI));
        }
        ensemble.push_back(make_spectrum(std::move(pts), "powerlaw"));
    }
    const RadialDensityModel model = fit_radial_density(ensemble, 8);
    for (double f = 0.2; f <= 0.9; f += 0.1) {
        const double r = f * radius;
        const double expected = 4.0 * r * r / M_PI;
        CHECK(model(r) == doctest::Approx(expected).epsilon(0.05));
    }
}

TEST_CASE("radial density fit is invariant under member relabeling") {
    auto ensemble = uniform_disc_ensemble(20, 200, 13);
    const RadialDensityModel forward = fit_radial_density(ensemble, 4);
    std::reverse(ensemble.begin(), ensemble.end());
    const RadialDensityModel reversed = fit_radial_density(ensemble, 4);
    for (double r = 1.0; r < 13.0; r += 1.7) {
        CHECK(forward(r) == reversed(r)); // pooled statistics only
    }
}

TEST_CASE("radial density fit error paths") {
    const auto tiny = uniform_disc_ensemble(1, 100, 3);
    CHECK_THROWS_AS(fit_radial_density(tiny, 8), std::runtime_error); // needs 450 points

    auto mixed = uniform_disc_ensemble(2, 300, 5);
    mixed[1].source_tag = "other";
    CHECK_THROWS_AS(fit_radial_density(mixed, 2), std::invalid_argument);
}

TEST_CASE("power-law model is exact") {
    const RadialDensityModel model = RadialDensityModel::power_law(2, 0.0, 2.0);
    for (double r = 0.1; r < 2.0; r += 0.3) {
        CHECK(model(r) == doctest::Approx(4.0 * r * r / M_PI).epsilon(1e-12));
        CHECK(model.derivative(r) == doctest::Approx(8.0 * r / M_PI).epsilon(1e-10));
    }
    CHECK(model.normalization_integral() == doctest::Approx(2.0 * 16.0).epsilon(1e-6));
}

TEST_CASE("spectrum CSV round trip") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "nhrmt_test_io";
    std::filesystem::create_directories(dir);
    const auto path = dir / "spec.csv";

    Spectrum s = make_spectrum({Complex(0.1234567890123456, -3.14159265358979),
                                Complex(-2.718281828459045, 1e-17)});
    s.dedup_applied = true;
    s.trim_window = std::make_pair(0.25, 7.5);
    write_spectrum_csv(path, s);

    const Spectrum back = read_spectrum_csv(path);
    REQUIRE(back.eigenvalues.size() == 2);
    CHECK(back.eigenvalues[0] == s.eigenvalues[0]); // 17 significant digits round-trip
    CHECK(back.eigenvalues[1] == s.eigenvalues[1]);
    CHECK(back.source_tag == s.source_tag);
    CHECK(back.params_digest == s.params_digest);
    CHECK(back.seed == s.seed);
    CHECK(back.dedup_applied);
    CHECK(back.trim_window->first == 0.25);
    CHECK(back.trim_window->second == 7.5);

    std::filesystem::remove_all(dir);
}
