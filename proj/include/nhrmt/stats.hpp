#pragma once

// Fluctuation statistics of two-dimensional spectra: nearest-neighbor spacing
// distributions (with local unfolding), spacing ratios of both types, number
// variance from discs and isochrones, and the analytic Ginibre number
// variance with its self-dual counterpart.

#include "nhrmt/rng.hpp"
#include "nhrmt/spectra.hpp"
#include "nhrmt/unfolding.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace nhrmt {

struct Histogram {
    std::vector<double> bin_edges;   // ascending, size counts.size() + 1
    std::vector<double> counts;      // raw counts, or densities after to_pdf()
    enum class Normalization { Counts, Pdf };
    Normalization normalization = Normalization::Counts;

    static Histogram from_samples(std::span<const double> samples, double lo, double hi,
                                  int bins);
    Histogram to_pdf() const;        // integrates to 1 over the binned range
    double bin_center(std::size_t i) const {
        return (bin_edges[i] + bin_edges[i + 1]) / 2.0;
    }
    double integral() const;
};

// max_i |a_i - b_i| over pdf values; both histograms must share bin edges.
double sup_norm_diff(const Histogram& a, const Histogram& b);

using RadialWindow = std::optional<std::pair<double, double>>;

// Distance of each eigenvalue to its nearest neighbor, rescaled through
// local_unfold_spacing when a density model is supplied (raw otherwise, for
// constant-density spectra). Neighbors are searched over the full spectrum;
// when a window is given only eigenvalues with |z| inside it contribute a
// spacing, which keeps trimmed boundaries from biasing the tail.
std::vector<double> nn_spacings(const Spectrum& s,
                                const RadialDensityModel* density = nullptr,
                                const RadialWindow& window = std::nullopt);

// Least-squares slope of log pdf vs log s over the populated bins with
// center < s_max_fit; the small-s repulsion exponent.
double fit_small_s_exponent(const Histogram& pdf, double s_max_fit);

// Type I: per eigenvalue A, (distance to nearest B) / (distance to next
// nearest C); in (0, 1] by construction.
std::vector<double> spacing_ratio_type1(const Spectrum& s,
                                        const RadialWindow& window = std::nullopt);

// Type II: with B the nearest neighbor of A and C the nearest neighbor of B,
// emits min(AB/BC, BC/AB), skipping mutual nearest-neighbor pairs (C = A).
std::vector<double> spacing_ratio_type2(const Spectrum& s,
                                        const RadialWindow& window = std::nullopt);

struct VarianceCurve {
    std::vector<double> targets;    // requested mean counts
    std::vector<double> n_mean;     // measured mean counts
    std::vector<double> sigma2;     // <n^2> - <n>^2
    std::vector<double> std_error;  // batch-means standard error of sigma2
    int centers_used = 0;
};

struct VarianceOptions {
    std::vector<double> targets;
    int centers = 200;
    int batches = 10;
    std::uint64_t seed = 1;
    int threads = 1;
    int n_dirs = 256;            // isochrone rays
    double geodesic_step = 0.0;  // 0 = default s/2000
    // Region (base coordinates) known to carry valid spectrum: counting
    // discs/isochrones must fit inside it. Annulus [region_r_min, region_r_max].
    double region_r_min = 0.0;
    double region_r_max = 0.0;
};

// Number variance over an ensemble. Without a density model, counts are taken
// in discs of radius sqrt(target) centered uniformly in the admissible
// annulus (the constant-density case). With a density model, counting regions
// are isochrones of unfolded radius sqrt(target); candidate centers whose
// isochrone leaves the support are rejected. Counts pool over all members at
// shared centers; the standard error comes from batch means over centers.
VarianceCurve number_variance(std::span<const Spectrum> members,
                              const RadialDensityModel* density,
                              const VarianceOptions& options);

// Same statistic for spectra unfolded onto k Riemann sheets: discs of radius
// sqrt(target) placed on one sheet, counted with the covering-space metric
// so that points on other sheets are excluded. region_r_min/max are bounds
// on the unfolded radius.
VarianceCurve number_variance_unfolded(std::span<const UnfoldedSpectrum> members,
                                       const VarianceOptions& options);

// Disc counting over an arbitrary region bounded by a polygon (used by the
// Cartesian control map whose image is not an annulus). Discs must fit inside
// the polygon and stay out of the central exclusion disc.
VarianceCurve number_variance_region(std::span<const std::vector<Complex>> member_points,
                                     std::span<const Complex> boundary_polygon,
                                     double central_exclusion_radius,
                                     const VarianceOptions& options);

// Exponentially scaled modified Bessel function I0(x) e^-|x|.
double bessel_i0_scaled(double x);

// Sigma^2_G(n) = n - integral over [0,n]^2 of I0(2 sqrt(e1 e2)) e^-(e1+e2),
// evaluated by adaptive quadrature of the scaled integrand to abs_tol.
double sigma2_ginibre_analytic(double n_mean, double abs_tol = 1e-8);

// Sigma^2_sdG(n) = Sigma^2_G(n / sqrt(2)).
double sigma2_selfdual_analytic(double n_mean, double abs_tol = 1e-8);

// Two-eigenvalue correlation of the Ginibre ensemble in the bulk:
// (1 - exp(-|z1 - z2|^2)) / pi^2.
double r2_ginibre(Complex z1, Complex z2);

// Brute-force nearest-neighbor indices (nearest, next nearest) of point i;
// the O(n^2) reference used by the grid-index equivalence tests.
std::pair<int, int> brute_force_two_nearest(std::span<const Complex> points, int i);

} // namespace nhrmt
