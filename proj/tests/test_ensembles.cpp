#include "nhrmt/ensembles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace nhrmt;

namespace {

EnsembleSpec make_spec(EnsembleClass c, int n, std::uint64_t seed = 1) {
    EnsembleSpec spec;
    spec.ensemble_class = c;
    spec.n = n;
    spec.seed = seed;
    return spec;
}

double modulus_quantile(const std::vector<Spectrum>& spectra, double q) {
    std::vector<double> moduli;
    for (const auto& s : spectra) {
        for (const Complex& z : s.eigenvalues) moduli.push_back(std::abs(z));
    }
    std::sort(moduli.begin(), moduli.end());
    return moduli[static_cast<std::size_t>(q * (moduli.size() - 1))];
}

} // namespace

TEST_CASE("symm-GinE draws are symmetric bitwise with the stated variances") {
    const auto spec = make_spec(EnsembleClass::SymmGinE, 400, 3);
    rng::Stream stream(7);
    const ComplexMatrix m = sample_symm_gine(spec, stream);

    for (int j = 0; j < spec.n; j += 37) {
        for (int k = j; k < spec.n; k += 41) {
            REQUIRE(m(j, k) == m(k, j)); // bitwise
        }
    }

    double off_sum_sq = 0.0;
    long off_count = 0;
    double diag_sum_sq = 0.0;
    for (int j = 0; j < spec.n; ++j) {
        diag_sum_sq += std::norm(m(j, j)); // two components
        for (int k = j + 1; k < spec.n; ++k) {
            off_sum_sq += std::norm(m(j, k));
            off_count += 2; // real and imaginary components
        }
    }
    // Off-diagonal components have variance 1/2, diagonal components 1.
    CHECK(off_sum_sq / off_count == doctest::Approx(0.5).epsilon(0.02));
    CHECK(diag_sum_sq / (2.0 * spec.n) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("GinE single entry is its own eigenvalue and fills the disc") {
    // N = 1 is below the spec floor, so check through a 2x2 diagonal-free
    // draw instead: the trace identity pins the eigenvalues.
    const auto spec = make_spec(EnsembleClass::GinE, 400, 5);
    const auto spectra = ensemble_spectra(spec, 4, 2);
    CHECK(spectra.size() == 4);
    CHECK(spectra.front().eigenvalues.size() == 400);

    const double sqrt_n = std::sqrt(400.0);
    const double q999 = modulus_quantile(spectra, 0.999);
    CHECK(q999 / sqrt_n > 0.9);
    CHECK(q999 / sqrt_n < 1.1);

    // Uniform disc: half the eigenvalues inside sqrt(N/2).
    long inside = 0, total = 0;
    for (const auto& s : spectra) {
        for (const Complex& z : s.eigenvalues) {
            inside += std::abs(z) < std::sqrt(400.0 / 2.0);
            ++total;
        }
    }
    CHECK(static_cast<double>(inside) / total == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("self-dual draws satisfy the quaternion pairings exactly") {
    const auto spec = make_spec(EnsembleClass::SelfDualGinE, 40, 11);
    rng::Stream stream(13);
    const ComplexMatrix m = sample_selfdual_gine(spec, stream);
    const auto check = check_selfdual(m);
    CHECK(check.ok);
    CHECK(check.max_defect == 0.0);

    // A plain Ginibre draw is never self-dual.
    rng::Stream other(17);
    const ComplexMatrix g = sample_gine(make_spec(EnsembleClass::GinE, 4, 1), other);
    CHECK_FALSE(check_selfdual(g).ok);

    CHECK_THROWS_AS(check_selfdual(ComplexMatrix::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("check_selfdual reads back an injected defect") {
    const auto spec = make_spec(EnsembleClass::SelfDualGinE, 2, 19);
    rng::Stream stream(19);
    ComplexMatrix m = sample_selfdual_gine(spec, stream);
    const double eps = 3e-7;
    m(0, 0) += eps; // breaks the (2k-1,2j-1) <-> (2j,2k) pairing by exactly eps
    const auto check = check_selfdual(m);
    CHECK_FALSE(check.ok);
    CHECK(check.max_defect == doctest::Approx(eps).epsilon(1e-9));
}

TEST_CASE("self-dual spectra are Kramers degenerate and deduplicated") {
    const auto spec = make_spec(EnsembleClass::SelfDualGinE, 100, 23);
    rng::Stream stream(rng::derive_seed(spec.seed, 0));
    const ComplexMatrix m = sample_selfdual_gine(spec, stream);
    const auto raw = numerics::eig_general(m);
    CHECK(raw.size() == 200);

    // Every raw eigenvalue has a partner within 1e-6 sqrt(N).
    const double tol = 1e-6 * std::sqrt(100.0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < raw.size(); ++j) {
            if (j != i) nearest = std::min(nearest, std::abs(raw[i] - raw[j]));
        }
        REQUIRE(nearest < tol);
    }

    const Spectrum s = spectrum_of(spec, 0);
    CHECK(s.eigenvalues.size() == 100);
    CHECK(s.dedup_applied);
}

TEST_CASE("identical spec and seed give identical matrices bit for bit") {
    const auto spec = make_spec(EnsembleClass::GinE, 60, 99);
    rng::Stream s1(5), s2(5);
    const ComplexMatrix a = sample_gine(spec, s1);
    const ComplexMatrix b = sample_gine(spec, s2);
    CHECK((a.array() == b.array()).all());

    const auto run1 = ensemble_spectra(spec, 6, 2);
    const auto run2 = ensemble_spectra(spec, 6, 1); // thread count must not matter
    for (int i = 0; i < 6; ++i) {
        REQUIRE(run1[i].eigenvalues.size() == run2[i].eigenvalues.size());
        for (std::size_t k = 0; k < run1[i].eigenvalues.size(); ++k) {
            REQUIRE(run1[i].eigenvalues[k] == run2[i].eigenvalues[k]);
        }
    }
}

TEST_CASE("circular-law support for all three classes at desk scale") {
    for (const auto ensemble_class :
         {EnsembleClass::SymmGinE, EnsembleClass::GinE, EnsembleClass::SelfDualGinE}) {
        const int n = ensemble_class == EnsembleClass::SelfDualGinE ? 150 : 300;
        const auto spectra = ensemble_spectra(make_spec(ensemble_class, n, 31), 8, 2);
        const double q999 = modulus_quantile(spectra, 0.999);
        INFO("class ", to_string(ensemble_class));
        CHECK(q999 / std::sqrt(static_cast<double>(n)) > 0.9);
        CHECK(q999 / std::sqrt(static_cast<double>(n)) < 1.1);
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(make_spec(EnsembleClass::GinE, 1).validate(), std::invalid_argument);
    CHECK(make_spec(EnsembleClass::SelfDualGinE, 5).matrix_dim() == 10);
    CHECK(make_spec(EnsembleClass::SymmGinE, 5).beta() == 1);
    CHECK(make_spec(EnsembleClass::GinE, 5).beta() == 2);
    CHECK(make_spec(EnsembleClass::SelfDualGinE, 5).beta() == 4);
    CHECK(ensemble_class_from_string("selfdual") == EnsembleClass::SelfDualGinE);
    CHECK_THROWS_AS(ensemble_class_from_string("bogus"), std::invalid_argument);
}
