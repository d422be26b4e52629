#include "nhrmt/kickedtop.hpp"

#include "nhrmt/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

using namespace nhrmt;
using namespace std::complex_literals;

namespace {

constexpr Complex kI{0.0, 1.0};

double max_modulus_deviation(const std::vector<Complex>& values, double target) {
    double dev = 0.0;
    for (const Complex& v : values) dev = std::max(dev, std::abs(std::abs(v) - target));
    return dev;
}

} // namespace

TEST_CASE("angular-momentum operators") {
    SUBCASE("spin 1/2") {
        const JOps ops = build_j_ops(0.5);
        CHECK(ops.jz(0, 0) == Complex(-0.5));
        CHECK(ops.jz(1, 1) == Complex(0.5));
        CHECK(ops.jx(0, 1) == Complex(0.5));
        CHECK(ops.jx(1, 0) == Complex(0.5));
    }

    SUBCASE("spin 1 Jx spectrum") {
        const auto eig = numerics::eig_hermitian(build_j_ops(1.0).jx);
        CHECK(eig.values(0) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(eig.values(1) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(eig.values(2) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("commutator and Casimir identities") {
        for (double j : {3.5, 20.0}) {
            const JOps ops = build_j_ops(j);
            const ComplexMatrix comm = ops.jx * ops.jy - ops.jy * ops.jx;
            CHECK((comm - kI * ops.jz).cwiseAbs().maxCoeff() < 1e-10);
            const double casimir =
                (ops.jx * ops.jx + ops.jy * ops.jy + ops.jz * ops.jz).trace().real();
            const double expected = (2.0 * j + 1.0) * j * (j + 1.0);
            CHECK(casimir == doctest::Approx(expected).epsilon(1e-8));
        }
    }

    CHECK_THROWS_AS(build_j_ops(0.3), std::invalid_argument);
    CHECK_THROWS_AS(build_j_ops(-1.0), std::invalid_argument);
}

TEST_CASE("OE Floquet operator") {
    SUBCASE("zero parameters give the identity") {
        const ComplexMatrix f = floquet_oe(1.0, 0.0, 0.0);
        CHECK((f - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("spin-1/2 closed form") {
        const double alpha = 0.7, tau = 1.3;
        const auto values = numerics::eig_general(floquet_oe(0.5, alpha, tau));
        // Jz^2 = I/4, so the eigenvalues are e^{-i tau/4} e^{-+i alpha/2}.
        std::vector<double> got = {std::arg(values[0]), std::arg(values[1])};
        std::vector<double> want = {std::arg(std::exp(-kI * (tau / 4.0)) *
                                             std::exp(-kI * (alpha / 2.0))),
                                    std::arg(std::exp(-kI * (tau / 4.0)) *
                                             std::exp(kI * (alpha / 2.0)))};
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-10));
        CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-10));
        CHECK(max_modulus_deviation(values, 1.0) < 1e-12);
    }

    SUBCASE("unitarity and time-reversal covariance at J = 20") {
        const double j = 20.0, alpha = 7.0, tau = 313.0;
        const ComplexMatrix f = floquet_oe(j, alpha, tau);
        CHECK(max_modulus_deviation(numerics::eig_general(f), 1.0) < 1e-9);

        // T = exp(i alpha Jx) K reverses the dynamics: T F T^-1 = F^dagger.
        const ComplexMatrix u = numerics::matfun_hermitian(
            build_j_ops(j).jx, [&](double x) { return std::exp(kI * alpha * x); });
        const ComplexMatrix reversed = u * f.conjugate() * u.adjoint();
        CHECK((reversed - f.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("UE Floquet operator") {
    SUBCASE("zero parameters give the identity") {
        const ComplexMatrix f = floquet_ue(1.5, 0.0, 0.0, 0.0);
        CHECK((f - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("k = 0 reduces to the OE form with tau/(2J)") {
        const double j = 6.0, alpha = 1.1, tau = 17.0;
        const ComplexMatrix ue = floquet_ue(j, alpha, tau, 0.0);
        const ComplexMatrix oe = floquet_oe(j, alpha, tau / (2.0 * j));
        CHECK((ue - oe).cwiseAbs().maxCoeff() < 1e-11);
    }

    SUBCASE("paper parameters stay unitary") {
        const auto values = numerics::eig_general(floquet_ue(30.0, 25.0, 45.0, 63.0));
        CHECK(max_modulus_deviation(values, 1.0) < 1e-9);
    }
}

TEST_CASE("SE Floquet operator") {
    SUBCASE("zero kicks give the identity") {
        const ComplexMatrix f = floquet_se(1.5, 0.0, 0.0, 0.0, 0.0);
        CHECK((f - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("integer J is rejected") {
        CHECK_THROWS_AS(floquet_se(2.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    }

    SUBCASE("Kramers pairs at J = 3/2") {
        const auto values = numerics::eig_general(floquet_se(1.5, 0.31, 0.47, 0.59, 0.71));
        REQUIRE(values.size() == 4);
        // Each eigenvalue has a partner within 1e-8.
        for (const Complex& v : values) {
            int partners = 0;
            for (const Complex& w : values) {
                if (&w != &v && std::abs(v - w) < 1e-8) ++partners;
            }
            CHECK(partners >= 1);
        }
    }
}

TEST_CASE("dissipation operator") {
    CHECK((dissipation_op(1.0, 0.0) - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() ==
          0.0);

    const ComplexMatrix d = dissipation_op(1.0, 2.0);
    CHECK(std::abs(d(0, 0) - std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(d(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(d(2, 2) - std::exp(-1.0)) < 1e-15);

    // J = 1000, gamma = 5/N: the edge entry is exp(-5 * 1000^2 / (2001 * 2000)).
    const double j = 1000.0, n = 2001.0;
    const ComplexMatrix big = dissipation_op(j, 5.0 / n);
    const double expected = std::exp(-5.0 * j * j / (n * 2.0 * j));
    CHECK(std::abs(big(2000, 2000).real() - expected) < 1e-12);
    CHECK(expected == doctest::Approx(std::exp(-1.2494)).epsilon(1e-4));

    CHECK_THROWS_AS(dissipation_op(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("dissipative Floquet spectra stay in the closed unit disc") {
    TopParams params;
    params.top_class = TopClass::OE;
    params.j = 20.0;
    params.alpha = 7.0;
    params.tau = 313.0;
    params.gamma = 5.0 / 41.0;
    const auto values = numerics::eig_general(dissipative_floquet(params));
    double max_mod = 0.0;
    for (const Complex& v : values) max_mod = std::max(max_mod, std::abs(v));
    CHECK(max_mod <= 1.0 + 1e-9);

    params.gamma = 0.0;
    const auto unit = numerics::eig_general(dissipative_floquet(params));
    CHECK(max_modulus_deviation(unit, 1.0) < 1e-9);
}

TEST_CASE("sweep grids") {
    TopParams params;
    params.top_class = TopClass::OE;
    params.j = 2.0;
    params.tau_range = {300.0, 350.0};
    params.members = 51;
    const auto grid = sweep_grid(params);
    REQUIRE(grid.size() == 51);
    for (int i = 0; i <= 50; ++i) {
        CHECK(grid[i].first == doctest::Approx(300.0 + i).epsilon(1e-14));
    }

    params.members = 1;
    CHECK(sweep_grid(params)[0].first == doctest::Approx(325.0));

    TopParams ue;
    ue.top_class = TopClass::UE;
    ue.j = 2.0;
    ue.tau_range = {40.0, 50.0};
    ue.kick_range = {60.0, 66.0};
    ue.members = 6;
    const auto ue_grid = sweep_grid(ue);
    REQUIRE(ue_grid.size() == 6); // 2 x 3
    CHECK(ue_grid.front().first == doctest::Approx(40.0));
    CHECK(ue_grid.back().first == doctest::Approx(50.0));
    CHECK(ue_grid.front().second == doctest::Approx(60.0));
    CHECK(ue_grid.back().second == doctest::Approx(66.0));

    TopParams bad = params;
    bad.tau_range = {10.0, 5.0};
    CHECK_THROWS_AS(sweep_grid(bad), std::invalid_argument);
}

TEST_CASE("sweep ensembles: determinism, unitarity, Kramers dedup") {
    TopParams params;
    params.top_class = TopClass::SE;
    params.j = 19.5;
    params.tau1 = 307.0;
    params.tau2 = 336.0;
    params.tau3_range = {506.0, 530.0};
    params.tau4_range = {370.0, 420.0};
    params.gamma = 5.0 / 40.0;
    params.members = 4;

    const auto run1 = sweep_ensemble(params, 2);
    const auto run2 = sweep_ensemble(params, 1);
    REQUIRE(run1.size() == 4);
    for (std::size_t i = 0; i < run1.size(); ++i) {
        // Raw dimension 40, Kramers-deduplicated to 20.
        REQUIRE(run1[i].eigenvalues.size() == 20);
        REQUIRE(run1[i].dedup_applied);
        for (std::size_t k = 0; k < 20; ++k) {
            REQUIRE(run1[i].eigenvalues[k] == run2[i].eigenvalues[k]);
        }
    }

    TopParams conservative;
    conservative.top_class = TopClass::UE;
    conservative.j = 15.0;
    conservative.alpha = 25.0;
    conservative.tau_range = {40.0, 50.0};
    conservative.kick_range = {60.0, 66.0};
    conservative.gamma = 0.0;
    conservative.members = 4;
    for (const auto& s : sweep_ensemble(conservative, 2)) {
        CHECK(max_modulus_deviation(s.eigenvalues, 1.0) < 1e-9);
    }
}

TEST_CASE("parameter validation") {
    TopParams params;
    params.top_class = TopClass::SE;
    params.j = 20.0; // integer J with SE
    CHECK_THROWS_WITH_AS(params.validate(),
                         doctest::Contains("half-integer"), std::invalid_argument);

    params.top_class = TopClass::OE;
    params.gamma = -1.0;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
