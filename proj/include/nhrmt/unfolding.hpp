#pragma once

// Unfolding of two-dimensional spectra. Locally, the separation of a pair is
// rescaled by sqrt(pi R1) at its midpoint. Non-locally, separations are
// geodesic lengths in the conformal metric ds^2 = pi R1 |dz|^2; isochrone
// curves (loci of fixed geodesic distance from a center) replace the discs of
// the uniform-density case. The flat power-law map r~ = r^k, theta~ = k theta
// and the two negative-control maps of the unfolding study are included.

#include "nhrmt/numerics.hpp"
#include "nhrmt/spectra.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nhrmt {

struct IsochroneCurve {
    Complex center;
    double arc_radius = 0.0;            // unfolded length s
    std::vector<Complex> vertices;      // closed polygon, implicitly closed
    int directions = 0;

    double signed_area() const;
    bool is_simple() const;             // no self-intersection
};

struct UnfoldedPoint {
    double radius = 0.0;  // r~
    double angle = 0.0;   // theta~ within the sheet, in [0, 2 pi)
    int sheet = 0;        // in [0, k) for the power-law map
};

struct UnfoldedSpectrum {
    std::vector<UnfoldedPoint> points;
    std::string map_tag;
    int sheets = 1;

    // Position within the sheet as a complex number.
    Complex plane_point(std::size_t i) const;
    // Angle on the k-sheeted cover, in [0, 2 pi sheets).
    double cover_angle(std::size_t i) const;
};

// sqrt(pi R1(|midpoint|)) * |a - b|; the unfolded separation of a close pair.
double local_unfold_spacing(Complex a, Complex b, const RadialDensityModel& density);

// Thrown when a geodesic or isochrone ray leaves the density support before
// reaching the requested arclength.
struct SupportExit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeodesicEnd {
    Complex point;
    Complex tangent; // unit direction of travel at the endpoint
};

// Integrates the geodesic of ds^2 = pi R1 |dz|^2 from `center` along the unit
// `direction` until unfolded arclength s; returns the endpoint. Classical RK4
// in Cartesian coordinates with unit metric speed; `step` is the arclength
// step (default s/2000 if <= 0). A center at the origin of a degenerate
// metric (R1(0) = 0, power-law case) is handled by the exact radial solution.
Complex geodesic_shoot(const RadialDensityModel& density, Complex center, Complex direction,
                       double s, double step = 0.0);

// Same integration, also reporting the endpoint tangent (reversing it and
// shooting back returns to the start).
GeodesicEnd geodesic_shoot_full(const RadialDensityModel& density, Complex center,
                                Complex direction, double s, double step = 0.0);

// Endpoints of n_dirs geodesics at equally spaced launch angles.
IsochroneCurve isochrone(const RadialDensityModel& density, Complex center, double s,
                         int n_dirs = 256, double step = 0.0);

// Winding-number point-in-polygon count; boundary points count as inside.
long count_inside(std::span<const Complex> points, const IsochroneCurve& curve);
long count_inside(const Spectrum& s, const IsochroneCurve& curve);

// r~ = r^k, theta~ = k theta; the flat unfolding of the power-law density
// R1 = k^2 r^(2k-2)/pi. Points land on k Riemann sheets.
UnfoldedSpectrum unfold_power_law(const Spectrum& s, int k);

// Negative control: cumulative radial map r~ = sqrt(k) r^k with theta kept.
// Density becomes 1/pi but neighbor ordering is not preserved.
UnfoldedSpectrum unfold_radial_only(const Spectrum& s, int k);

// Negative control for k = 2: x~ = (4/3) x^3 + 4 x y^2, y~ = y (the
// weakly-non-Hermitian recipe applied out of regime).
UnfoldedSpectrum unfold_cartesian(const Spectrum& s);

// Gaussian curvature K = -(1/2 rho) Laplacian(ln rho) of ds^2 = rho |dz|^2,
// rho = pi R1, by centered finite differences on the density model.
double metric_curvature(const RadialDensityModel& density, double r);

// Debug export: vertex list as CSV "re,im".
void write_isochrone_csv(const std::filesystem::path& path, const IsochroneCurve& curve);

} // namespace nhrmt
