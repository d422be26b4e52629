#pragma once

// Samplers for the three non-Hermitian symmetry classes: complex symmetric
// (symm-GinE, beta = 1), Ginibre (GinE, beta = 2), and self-dual matrices of
// complex quaternions (self-dual-GinE, beta = 4, realized as 2N x 2N complex
// matrices). Component variances follow from the matrix weight
// exp(-(beta/2) Tr M^dag M); all three classes fill a disc of radius ~sqrt(N).

#include "nhrmt/numerics.hpp"
#include "nhrmt/rng.hpp"
#include "nhrmt/spectra.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nhrmt {

enum class EnsembleClass { SymmGinE, GinE, SelfDualGinE };

std::string to_string(EnsembleClass c);
EnsembleClass ensemble_class_from_string(const std::string& name);

struct EnsembleSpec {
    EnsembleClass ensemble_class = EnsembleClass::GinE;
    int n = 2;               // scalar/quaternion dimension N
    std::uint64_t seed = 0;

    int beta() const;        // 1, 2, 4
    int matrix_dim() const;  // N for beta = 1, 2; 2N for beta = 4
    void validate() const;   // n >= 2
};

// N x N complex symmetric draw: diagonal components are N(0, 1), off-diagonal
// components N(0, 1/2), m(j,k) = m(k,j) bitwise.
ComplexMatrix sample_symm_gine(const EnsembleSpec& spec, rng::Stream& stream);

// N x N draw with all N^2 entries independent, components N(0, 1/2).
ComplexMatrix sample_gine(const EnsembleSpec& spec, rng::Stream& stream);

// 2N x 2N self-dual draw (G - J G^T J)/2 with G a Ginibre draw and J the
// standard symplectic unit; satisfies the quaternion self-duality conditions
// exactly by construction.
ComplexMatrix sample_selfdual_gine(const EnsembleSpec& spec, rng::Stream& stream);

ComplexMatrix sample_matrix(const EnsembleSpec& spec, rng::Stream& stream);

struct SelfDualCheck {
    bool ok = false;
    double max_defect = 0.0;
};

// Entrywise verification of the four self-duality pairings; independent of
// the projector used by the sampler. Throws on odd dimension.
SelfDualCheck check_selfdual(const ComplexMatrix& m, double tol = 1e-14);

// Spectrum of one draw. Self-dual spectra have their Kramers partners
// removed. The member index selects the sub-stream seed, so members can be
// generated in parallel and still be bit-for-bit reproducible.
Spectrum spectrum_of(const EnsembleSpec& spec, std::uint64_t member_index = 0);

std::vector<Spectrum> ensemble_spectra(const EnsembleSpec& spec, int members, int threads);

} // namespace nhrmt
