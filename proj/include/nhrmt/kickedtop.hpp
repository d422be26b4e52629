#pragma once

// Angular-momentum operators and the kicked-top Floquet operators for the
// orthogonal (OE), unitary (UE), and symplectic (SE) symmetry classes, plus
// the dissipation operator D = exp(-gamma Jz^2 / 2J) that turns them into
// contractive maps. Ensembles come from uniform parameter-grid sweeps.

#include "nhrmt/numerics.hpp"
#include "nhrmt/spectra.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nhrmt {

enum class TopClass { OE, UE, SE };

std::string to_string(TopClass c);
TopClass top_class_from_string(const std::string& name);

struct SweepRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct TopParams {
    TopClass top_class = TopClass::OE;
    double j = 250.0;          // total angular momentum; SE requires half-integer
    double alpha = 0.0;        // precession angle (OE, UE)
    double tau = 0.0;          // kick strength (OE, UE point value)
    double kick = 0.0;         // second kick strength (UE point value)
    double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0, tau4 = 0.0; // SE point values
    double gamma = 0.0;        // dissipation strength; 0 = conservative
    // The OE exponent is exp(-i tau Jz^2) with no 1/2J factor; set this to
    // carry the UE-style 1/2J normalization instead.
    bool oe_half_j_norm = false;

    SweepRange tau_range;      // OE, UE
    SweepRange kick_range;     // UE
    SweepRange tau3_range, tau4_range; // SE
    int members = 1;
    std::uint64_t seed = 0;    // provenance only; sweeps are deterministic grids

    int dim() const;           // N = 2J + 1
    void validate() const;
};

struct JOps {
    ComplexMatrix jx, jy, jz;
};

// (2J+1)-dimensional angular-momentum matrices in the Jz eigenbasis
// (m ascending from -J to J). [Jx, Jy] = i Jz to roundoff.
JOps build_j_ops(double j);

// F = exp(-i tau Jz^2) exp(-i alpha Jx); time-reversal invariant with
// T = exp(i alpha Jx) K.
ComplexMatrix floquet_oe(double j, double alpha, double tau);

// F = exp(-i k Jy^2/2J) exp(-i tau Jz^2/2J) exp(-i alpha Jx).
ComplexMatrix floquet_ue(double j, double alpha, double tau, double k);

// F = exp(-i tau1 Jz^2/2J) exp(-(i/2J)(tau2 Jz^2 + tau3 {Jx,Jz} + tau4 {Jx,Jy})).
// Half-integer J only; the spectrum is Kramers degenerate.
ComplexMatrix floquet_se(double j, double tau1, double tau2, double tau3, double tau4);

// D = exp(-gamma Jz^2/2J): diagonal, entries exp(-gamma m^2/2J).
ComplexMatrix dissipation_op(double j, double gamma);

// D times the class's conservative Floquet operator, built from the point
// values in params.
ComplexMatrix dissipative_floquet(const TopParams& params);

// Uniform-grid sweep over the class's swept parameters (OE: tau; UE: tau and
// kick; SE: tau3 and tau4). Two-parameter sweeps factor `members` into the
// most nearly square grid m1 x m2 = members; a one-point dimension sits at
// the midpoint of its range. SE spectra are deduplicated.
std::vector<Spectrum> sweep_ensemble(const TopParams& params, int threads);

// Swept-parameter values of each grid point, in member order (for tests and
// manifests).
std::vector<std::pair<double, double>> sweep_grid(const TopParams& params);

} // namespace nhrmt
