#include "nhrmt/kickedtop.hpp"

#include "nhrmt/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nhrmt {

namespace {

using numerics::HermitianEigen;

constexpr Complex kI{0.0, 1.0};

void check_j(double j) {
    const double two_j = 2.0 * j;
    if (!(j > 0.0) || std::abs(two_j - std::round(two_j)) > 1e-9) {
        throw std::invalid_argument("kicked top: J must be a positive integer or half-integer, got " +
                                    std::to_string(j));
    }
}

bool is_half_integer(double j) {
    return static_cast<long long>(std::llround(2.0 * j)) % 2 != 0;
}

// Diagonal of exp(-i coeff m^2), m = -J..J.
Eigen::VectorXcd jz2_phases(double j, double coeff) {
    const int n = static_cast<int>(std::llround(2.0 * j)) + 1;
    Eigen::VectorXcd d(n);
    for (int i = 0; i < n; ++i) {
        const double m = -j + i;
        d(i) = std::exp(-kI * (coeff * m * m));
    }
    return d;
}

} // namespace

std::string to_string(TopClass c) {
    switch (c) {
        case TopClass::OE: return "oe";
        case TopClass::UE: return "ue";
        case TopClass::SE: return "se";
    }
    throw std::logic_error("unknown top class");
}

TopClass top_class_from_string(const std::string& name) {
    if (name == "oe") return TopClass::OE;
    if (name == "ue") return TopClass::UE;
    if (name == "se") return TopClass::SE;
    throw std::invalid_argument("unknown top class '" + name + "' (expected oe, ue, or se)");
}

int TopParams::dim() const {
    return static_cast<int>(std::llround(2.0 * j)) + 1;
}

void TopParams::validate() const {
    check_j(j);
    if (top_class == TopClass::SE && !is_half_integer(j)) {
        throw std::invalid_argument(
            "kicked top: the SE class requires half-integer J (Kramers structure), got J = " +
            std::to_string(j));
    }
    if (gamma < 0.0) throw std::invalid_argument("kicked top: gamma must be >= 0");
    if (members < 1) throw std::invalid_argument("kicked top: members must be >= 1");
    auto check_range = [](const SweepRange& r, const char* name) {
        if (r.hi < r.lo) {
            throw std::invalid_argument(std::string("kicked top: empty sweep range for ") + name);
        }
    };
    switch (top_class) {
        case TopClass::OE:
            check_range(tau_range, "tau");
            break;
        case TopClass::UE:
            check_range(tau_range, "tau");
            check_range(kick_range, "k");
            break;
        case TopClass::SE:
            check_range(tau3_range, "tau3");
            check_range(tau4_range, "tau4");
            break;
    }
}

JOps build_j_ops(double j) {
    check_j(j);
    const int n = static_cast<int>(std::llround(2.0 * j)) + 1;
    ComplexMatrix jp = ComplexMatrix::Zero(n, n);
    ComplexMatrix jz = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double m = -j + i;
        jz(i, i) = m;
        if (i + 1 < n) jp(i + 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    JOps ops;
    ops.jx = (jp + jp.adjoint()) / 2.0;
    ops.jy = (jp - jp.adjoint()) / (2.0 * kI);
    ops.jz = jz;
    return ops;
}

ComplexMatrix floquet_oe(double j, double alpha, double tau) {
    const JOps ops = build_j_ops(j);
    const ComplexMatrix precession =
        numerics::matfun_hermitian(ops.jx, [&](double x) { return std::exp(-kI * alpha * x); });
    return jz2_phases(j, tau).asDiagonal() * precession;
}

ComplexMatrix floquet_ue(double j, double alpha, double tau, double k) {
    const JOps ops = build_j_ops(j);
    const double inv2j = 1.0 / (2.0 * j);
    const ComplexMatrix precession =
        numerics::matfun_hermitian(ops.jx, [&](double x) { return std::exp(-kI * alpha * x); });
    const ComplexMatrix kick_y = numerics::matfun_hermitian(
        ops.jy, [&](double y) { return std::exp(-kI * k * y * y * inv2j); });
    return kick_y * (jz2_phases(j, tau * inv2j).asDiagonal() * precession);
}

ComplexMatrix floquet_se(double j, double tau1, double tau2, double tau3, double tau4) {
    check_j(j);
    if (!is_half_integer(j)) {
        throw std::invalid_argument("floquet_se: half-integer J required, got " + std::to_string(j));
    }
    const JOps ops = build_j_ops(j);
    const double inv2j = 1.0 / (2.0 * j);
    const ComplexMatrix xz = ops.jx * ops.jz + ops.jz * ops.jx;
    const ComplexMatrix xy = ops.jx * ops.jy + ops.jy * ops.jx;
    const ComplexMatrix generator = tau2 * ops.jz * ops.jz + tau3 * xz + tau4 * xy;
    const ComplexMatrix mixed = numerics::matfun_hermitian(
        generator, [&](double x) { return std::exp(-kI * x * inv2j); });
    return jz2_phases(j, tau1 * inv2j).asDiagonal() * mixed;
}

ComplexMatrix dissipation_op(double j, double gamma) {
    check_j(j);
    if (gamma < 0.0) throw std::invalid_argument("dissipation_op: gamma must be >= 0");
    const int n = static_cast<int>(std::llround(2.0 * j)) + 1;
    ComplexMatrix d = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double m = -j + i;
        d(i, i) = std::exp(-gamma * m * m / (2.0 * j));
    }
    return d;
}

ComplexMatrix dissipative_floquet(const TopParams& params) {
    params.validate();
    ComplexMatrix f;
    switch (params.top_class) {
        case TopClass::OE:
            f = floquet_oe(params.j, params.alpha,
                           params.oe_half_j_norm ? params.tau / (2.0 * params.j) : params.tau);
            break;
        case TopClass::UE:
            f = floquet_ue(params.j, params.alpha, params.tau, params.kick);
            break;
        case TopClass::SE:
            f = floquet_se(params.j, params.tau1, params.tau2, params.tau3, params.tau4);
            break;
    }
    if (params.gamma > 0.0) {
        const int n = params.dim();
        for (int i = 0; i < n; ++i) {
            const double m = -params.j + i;
            f.row(i) *= std::exp(-params.gamma * m * m / (2.0 * params.j));
        }
    }
    return f;
}

std::vector<std::pair<double, double>> sweep_grid(const TopParams& params) {
    params.validate();
    auto linpoint = [](const SweepRange& r, int count, int i) {
        if (count <= 1) return (r.lo + r.hi) / 2.0;
        return r.lo + (r.hi - r.lo) * static_cast<double>(i) / (count - 1);
    };

    std::vector<std::pair<double, double>> grid;
    grid.reserve(params.members);
    if (params.top_class == TopClass::OE) {
        for (int i = 0; i < params.members; ++i) {
            grid.emplace_back(linpoint(params.tau_range, params.members, i), 0.0);
        }
        return grid;
    }
    // Two swept parameters: factor members into the most nearly square grid.
    int m1 = static_cast<int>(std::sqrt(static_cast<double>(params.members)));
    while (m1 > 1 && params.members % m1 != 0) --m1;
    const int m2 = params.members / m1;
    const SweepRange& ra = params.top_class == TopClass::UE ? params.tau_range : params.tau3_range;
    const SweepRange& rb = params.top_class == TopClass::UE ? params.kick_range : params.tau4_range;
    for (int a = 0; a < m1; ++a) {
        for (int b = 0; b < m2; ++b) {
            grid.emplace_back(linpoint(ra, m1, a), linpoint(rb, m2, b));
        }
    }
    return grid;
}

std::vector<Spectrum> sweep_ensemble(const TopParams& params, int threads) {
    params.validate();
    const auto grid = sweep_grid(params);
    const JOps ops = build_j_ops(params.j);
    const double inv2j = 1.0 / (2.0 * params.j);
    const int n = params.dim();

    Eigen::VectorXd dissipation(n);
    for (int i = 0; i < n; ++i) {
        const double m = -params.j + i;
        dissipation(i) = std::exp(-params.gamma * m * m * inv2j);
    }

    // Factors that do not depend on the swept parameters are decomposed once.
    ComplexMatrix precession;       // OE/UE: exp(-i alpha Jx)
    HermitianEigen jy_eig;          // UE: for exp(-i k Jy^2/2J)
    ComplexMatrix xz, xy, jz2;      // SE generator pieces
    Eigen::VectorXcd tau1_phases;   // SE fixed first factor
    switch (params.top_class) {
        case TopClass::OE:
        case TopClass::UE:
            precession = numerics::matfun_hermitian(
                ops.jx, [&](double x) { return std::exp(-kI * params.alpha * x); });
            if (params.top_class == TopClass::UE) jy_eig = numerics::eig_hermitian(ops.jy);
            break;
        case TopClass::SE:
            xz = ops.jx * ops.jz + ops.jz * ops.jx;
            xy = ops.jx * ops.jy + ops.jy * ops.jx;
            jz2 = ops.jz * ops.jz;
            tau1_phases = jz2_phases(params.j, params.tau1 * inv2j);
            break;
    }

    std::vector<Spectrum> out(grid.size());
    auto run_member = [&](std::size_t i) {
        const auto [a, b] = grid[i];
        ComplexMatrix f;
        switch (params.top_class) {
            case TopClass::OE: {
                const double tau_eff = params.oe_half_j_norm ? a * inv2j : a;
                f = jz2_phases(params.j, tau_eff).asDiagonal() * precession;
                break;
            }
            case TopClass::UE: {
                const ComplexMatrix inner =
                    jz2_phases(params.j, a * inv2j).asDiagonal() * precession;
                Eigen::VectorXcd ky(n);
                for (int q = 0; q < n; ++q) {
                    const double y = jy_eig.values(q);
                    ky(q) = std::exp(-kI * b * y * y * inv2j);
                }
                f = jy_eig.vectors * (ky.asDiagonal() * (jy_eig.vectors.adjoint() * inner));
                break;
            }
            case TopClass::SE: {
                const ComplexMatrix generator = params.tau2 * jz2 + a * xz + b * xy;
                const ComplexMatrix mixed = numerics::matfun_hermitian(
                    generator, [&](double x) { return std::exp(-kI * x * inv2j); });
                f = tau1_phases.asDiagonal() * mixed;
                break;
            }
        }
        if (params.gamma > 0.0) f = dissipation.asDiagonal() * f;

        Spectrum s;
        s.eigenvalues = numerics::eig_general(f);
        s.source_tag = "top-" + to_string(params.top_class);
        s.seed = params.seed;
        std::ostringstream digest;
        digest.precision(17);
        digest << "class=" << to_string(params.top_class) << ";j=" << params.j
               << ";gamma=" << params.gamma << ";alpha=" << params.alpha;
        if (params.top_class == TopClass::SE) {
            digest << ";tau1=" << params.tau1 << ";tau2=" << params.tau2 << ";tau3=" << a
                   << ";tau4=" << b;
        } else {
            digest << ";tau=" << a;
            if (params.top_class == TopClass::UE) digest << ";k=" << b;
        }
        digest << ";member=" << i;
        s.params_digest = digest.str();

        if (params.top_class == TopClass::SE) {
            s = dedup_kramers(s, default_kramers_tol(s));
        }
        out[i] = std::move(s);
    };
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            run_member(i);
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep member " + std::to_string(i) + ": " + e.what());
        }
    });
    return out;
}

} // namespace nhrmt
