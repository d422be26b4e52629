#pragma once

// The Spectrum data model: complex eigenvalue sets with provenance, Kramers
// deduplication, boundary trimming, and the smooth radial density estimate
// used by the unfolding machinery. Spectra are circularly symmetric for every
// generator in this project, so the density is modeled as a function of |z|.

#include "nhrmt/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nhrmt {

struct Spectrum {
    std::vector<Complex> eigenvalues;
    std::string source_tag;     // e.g. "gine", "top-oe", "loggas-k2"
    std::string params_digest;  // canonical serialization of generating parameters
    std::uint64_t seed = 0;
    bool dedup_applied = false;
    std::optional<std::pair<double, double>> trim_window; // (r_min, r_max) if trimmed

    std::size_t size() const { return eigenvalues.size(); }
    void validate() const; // non-empty, all entries finite
};

// Default Kramers pairing tolerance: 1e-6 times the median eigenvalue modulus.
double default_kramers_tol(const Spectrum& s);

// Collapses a doubly degenerate spectrum to one representative per pair.
// Pairs are matched globally, shortest gap first; throws if any matched pair
// is separated by >= tol (the input was not doubly degenerate) or if the
// eigenvalue count is odd.
Spectrum dedup_kramers(const Spectrum& s, double tol);

// Keeps eigenvalues with r_min <= |z| <= r_max and records the window.
// Throws if the window is invalid or the result would be empty.
Spectrum trim(const Spectrum& s, double r_min, double r_max);

// Smooth radial spectral density R1(r), normalized so that the integral of
// 2 pi r R1(r) over the support equals the per-member eigenvalue count.
// Internally the polynomial is stored in the scaled variable
// t = (r - center)/half_width to keep high degrees well conditioned.
class RadialDensityModel {
public:
    RadialDensityModel() = default;
    RadialDensityModel(std::vector<double> coeffs_scaled, double r_min, double r_max,
                       double total_count, int fit_degree);

    // Exact model R1 = k^2 r^(2k-2) / pi on [r_min, r_max] for the power-law
    // potential V = |z|^(2k); used by the unfolding study where the density
    // is known in closed form.
    static RadialDensityModel power_law(int k, double r_min, double r_max);

    double operator()(double r) const;  // clamped at 0
    double derivative(double r) const;  // d R1 / dr of the raw polynomial
    bool in_support(double r) const { return r >= r_min_ && r <= r_max_; }

    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    double total_count() const { return total_count_; }
    int fit_degree() const { return fit_degree_; }
    // Density floor below which the conformal metric is considered degenerate.
    double density_floor() const { return floor_; }

    // Same polynomial, evaluated over a wider (or narrower) support window.
    // Values outside the fitted window are extrapolations; extend only by a
    // margin over which the fit stays physical (e.g. a few mean spacings, so
    // spacing-pair midpoints just outside a statistics window resolve).
    RadialDensityModel with_support(double r_min, double r_max) const;

    // Numerical integral of 2 pi r R1 over the support (composite Simpson).
    double normalization_integral() const;

private:
    double to_t(double r) const { return (r - center_) / half_width_; }

    std::vector<double> coeffs_; // in t
    double r_min_ = 0.0, r_max_ = 1.0;
    double center_ = 0.5, half_width_ = 0.5;
    double total_count_ = 0.0;
    double floor_ = 0.0;
    int fit_degree_ = 0;
};

struct DensityFitOptions {
    int degree = 8;
    int bins = 100;
    int min_count_per_coeff = 50;   // pooled eigenvalues required per coefficient
    double max_negative_fraction = 0.05;
};

// Histogram of pooled |z| over the ensemble, converted to density per unit
// area per member, least-squares polynomial fit, renormalized to the
// per-member count. All spectra must share a source tag.
RadialDensityModel fit_radial_density(std::span<const Spectrum> ensemble, int degree);
RadialDensityModel fit_radial_density(std::span<const Spectrum> ensemble,
                                      const DensityFitOptions& options);

// --- serialization (CSV "re,im" plus key = value sidecar) ---

void write_spectrum_csv(const std::filesystem::path& csv_path, const Spectrum& s);
Spectrum read_spectrum_csv(const std::filesystem::path& csv_path);

} // namespace nhrmt
