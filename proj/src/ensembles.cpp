#include "nhrmt/ensembles.hpp"

#include "nhrmt/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nhrmt {

std::string to_string(EnsembleClass c) {
    switch (c) {
        case EnsembleClass::SymmGinE: return "symm-gine";
        case EnsembleClass::GinE: return "gine";
        case EnsembleClass::SelfDualGinE: return "selfdual-gine";
    }
    throw std::logic_error("unknown ensemble class");
}

EnsembleClass ensemble_class_from_string(const std::string& name) {
    if (name == "symm" || name == "symm-gine") return EnsembleClass::SymmGinE;
    if (name == "gine") return EnsembleClass::GinE;
    if (name == "selfdual" || name == "selfdual-gine") return EnsembleClass::SelfDualGinE;
    throw std::invalid_argument("unknown ensemble class '" + name +
                                "' (expected symm, gine, or selfdual)");
}

int EnsembleSpec::beta() const {
    switch (ensemble_class) {
        case EnsembleClass::SymmGinE: return 1;
        case EnsembleClass::GinE: return 2;
        case EnsembleClass::SelfDualGinE: return 4;
    }
    throw std::logic_error("unknown ensemble class");
}

int EnsembleSpec::matrix_dim() const {
    return ensemble_class == EnsembleClass::SelfDualGinE ? 2 * n : n;
}

void EnsembleSpec::validate() const {
    if (n < 2) throw std::invalid_argument("EnsembleSpec: n must be >= 2");
}

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Complex gauss_entry(rng::Stream& stream, double component_sd) {
    const double re = stream.gaussian(component_sd);
    const double im = stream.gaussian(component_sd);
    return {re, im};
}

} // namespace

ComplexMatrix sample_symm_gine(const EnsembleSpec& spec, rng::Stream& stream) {
    spec.validate();
    if (spec.ensemble_class != EnsembleClass::SymmGinE) {
        throw std::invalid_argument("sample_symm_gine: wrong ensemble class");
    }
    const int n = spec.n;
    ComplexMatrix m(n, n);
    // Tr M^dag M counts off-diagonal moduli twice, so the beta = 1 weight
    // gives variance 1 per diagonal component and 1/2 off the diagonal.
    for (int j = 0; j < n; ++j) {
        m(j, j) = gauss_entry(stream, 1.0);
        for (int k = j + 1; k < n; ++k) {
            const Complex z = gauss_entry(stream, kInvSqrt2);
            m(j, k) = z;
            m(k, j) = z;
        }
    }
    return m;
}

ComplexMatrix sample_gine(const EnsembleSpec& spec, rng::Stream& stream) {
    spec.validate();
    if (spec.ensemble_class != EnsembleClass::GinE) {
        throw std::invalid_argument("sample_gine: wrong ensemble class");
    }
    const int n = spec.n;
    ComplexMatrix m(n, n);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) m(j, k) = gauss_entry(stream, kInvSqrt2);
    }
    return m;
}

ComplexMatrix sample_selfdual_gine(const EnsembleSpec& spec, rng::Stream& stream) {
    spec.validate();
    if (spec.ensemble_class != EnsembleClass::SelfDualGinE) {
        throw std::invalid_argument("sample_selfdual_gine: wrong ensemble class");
    }
    const int dim = 2 * spec.n;
    ComplexMatrix g(dim, dim);
    for (int k = 0; k < dim; ++k) {
        for (int j = 0; j < dim; ++j) g(j, k) = gauss_entry(stream, kInvSqrt2);
    }
    // (G - J G^T J)/2 with J = diag blocks [[0, 1], [-1, 0]], written out
    // entrywise: (J G^T J)(2a, 2b) = -G(2b+1, 2a+1) and so on.
    ComplexMatrix m(dim, dim);
    for (int b = 0; b < spec.n; ++b) {
        for (int a = 0; a < spec.n; ++a) {
            const int r = 2 * a, c = 2 * b;
            m(r, c) = (g(r, c) + g(c + 1, r + 1)) / 2.0;
            m(r, c + 1) = (g(r, c + 1) - g(c, r + 1)) / 2.0;
            m(r + 1, c) = (g(r + 1, c) - g(c + 1, r)) / 2.0;
            m(r + 1, c + 1) = (g(r + 1, c + 1) + g(c, r)) / 2.0;
        }
    }
    return m;
}

ComplexMatrix sample_matrix(const EnsembleSpec& spec, rng::Stream& stream) {
    switch (spec.ensemble_class) {
        case EnsembleClass::SymmGinE: return sample_symm_gine(spec, stream);
        case EnsembleClass::GinE: return sample_gine(spec, stream);
        case EnsembleClass::SelfDualGinE: return sample_selfdual_gine(spec, stream);
    }
    throw std::logic_error("unknown ensemble class");
}

SelfDualCheck check_selfdual(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0) {
        throw std::invalid_argument("check_selfdual: matrix dimension must be even and square");
    }
    const int n = static_cast<int>(m.rows()) / 2;
    double defect = 0.0;
    for (int k = 1; k <= n; ++k) {
        for (int j = 1; j <= n; ++j) {
            defect = std::max(defect, std::abs(m(2 * k - 2, 2 * j - 2) - m(2 * j - 1, 2 * k - 1)));
            defect = std::max(defect, std::abs(m(2 * k - 2, 2 * j - 1) + m(2 * j - 2, 2 * k - 1)));
            defect = std::max(defect, std::abs(m(2 * k - 1, 2 * j - 2) + m(2 * j - 1, 2 * k - 2)));
            defect = std::max(defect, std::abs(m(2 * k - 1, 2 * j - 1) - m(2 * j - 2, 2 * k - 2)));
        }
    }
    return {defect <= tol, defect};
}

Spectrum spectrum_of(const EnsembleSpec& spec, std::uint64_t member_index) {
    spec.validate();
    rng::Stream stream(rng::derive_seed(spec.seed, member_index));
    const ComplexMatrix m = sample_matrix(spec, stream);

    Spectrum s;
    s.eigenvalues = numerics::eig_general(m);
    s.source_tag = to_string(spec.ensemble_class);
    s.seed = spec.seed;
    std::ostringstream digest;
    digest << "class=" << to_string(spec.ensemble_class) << ";n=" << spec.n
           << ";seed=" << spec.seed << ";member=" << member_index;
    s.params_digest = digest.str();

    if (spec.ensemble_class == EnsembleClass::SelfDualGinE) {
        s = dedup_kramers(s, default_kramers_tol(s));
    }
    return s;
}

std::vector<Spectrum> ensemble_spectra(const EnsembleSpec& spec, int members, int threads) {
    if (members < 1) throw std::invalid_argument("ensemble_spectra: members must be >= 1");
    std::vector<Spectrum> out(members);
    parallel_for(members, threads, [&](std::size_t i) {
        try {
            out[i] = spectrum_of(spec, i);
        } catch (const std::exception& e) {
            throw std::runtime_error("ensemble member " + std::to_string(i) + ": " + e.what());
        }
    });
    return out;
}

} // namespace nhrmt
