#include "nhrmt/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nhrmt {

void Spectrum::validate() const {
    if (eigenvalues.empty()) throw std::invalid_argument("Spectrum: empty eigenvalue list");
    for (const Complex& z : eigenvalues) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw std::invalid_argument("Spectrum: non-finite eigenvalue");
        }
    }
}

double default_kramers_tol(const Spectrum& s) {
    std::vector<double> moduli(s.eigenvalues.size());
    std::transform(s.eigenvalues.begin(), s.eigenvalues.end(), moduli.begin(),
                   [](const Complex& z) { return std::abs(z); });
    const std::size_t mid = moduli.size() / 2;
    std::nth_element(moduli.begin(), moduli.begin() + mid, moduli.end());
    return 1e-6 * moduli[mid];
}

Spectrum dedup_kramers(const Spectrum& s, double tol) {
    s.validate();
    if (s.dedup_applied) return s; // idempotent
    const std::size_t n = s.eigenvalues.size();
    if (n % 2 != 0) {
        throw std::invalid_argument("dedup_kramers: odd eigenvalue count " + std::to_string(n));
    }

    // Kramers partners sit at roundoff distance while distinct eigenvalues are
    // separated by the mean spacing, so greedy nearest-neighbor pairing inside
    // a real-part window of width tol is exact for valid inputs.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return s.eigenvalues[a].real() < s.eigenvalues[b].real();
    });

    std::vector<char> paired(n, 0);
    Spectrum out = s;
    out.eigenvalues.clear();
    out.eigenvalues.reserve(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t a = order[i];
        if (paired[a]) continue;
        const Complex za = s.eigenvalues[a];
        double best = tol;
        std::size_t best_j = n;
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::uint32_t b = order[j];
            if (s.eigenvalues[b].real() - za.real() >= tol) break;
            if (paired[b]) continue;
            const double d = std::abs(s.eigenvalues[b] - za);
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j == n) {
            throw std::runtime_error("dedup_kramers: eigenvalue " + std::to_string(a) +
                                     " has no partner within tolerance " + std::to_string(tol) +
                                     " (input not doubly degenerate?)");
        }
        paired[a] = paired[order[best_j]] = 1;
        out.eigenvalues.push_back(std::min(a, order[best_j]) == a
                                      ? za
                                      : s.eigenvalues[order[best_j]]);
    }
    out.dedup_applied = true;
    return out;
}

Spectrum trim(const Spectrum& s, double r_min, double r_max) {
    s.validate();
    if (!(r_min >= 0.0) || !(r_min < r_max)) {
        throw std::invalid_argument("trim: require 0 <= r_min < r_max");
    }
    Spectrum out = s;
    out.eigenvalues.clear();
    for (const Complex& z : s.eigenvalues) {
        const double r = std::abs(z);
        if (r >= r_min && r <= r_max) out.eigenvalues.push_back(z);
    }
    if (out.eigenvalues.empty()) {
        throw std::runtime_error("trim: no eigenvalues left in [" + std::to_string(r_min) + ", " +
                                 std::to_string(r_max) + "]");
    }
    // Nested trims compose to the window intersection.
    double lo = r_min, hi = r_max;
    if (s.trim_window) {
        lo = std::max(lo, s.trim_window->first);
        hi = std::min(hi, s.trim_window->second);
    }
    out.trim_window = std::make_pair(lo, hi);
    return out;
}

// --- RadialDensityModel ---

RadialDensityModel::RadialDensityModel(std::vector<double> coeffs_scaled, double r_min,
                                       double r_max, double total_count, int fit_degree)
    : coeffs_(std::move(coeffs_scaled)),
      r_min_(r_min),
      r_max_(r_max),
      center_((r_min + r_max) / 2.0),
      half_width_((r_max - r_min) / 2.0),
      total_count_(total_count),
      fit_degree_(fit_degree) {
    if (!(r_min >= 0.0) || !(r_min < r_max) || coeffs_.empty()) {
        throw std::invalid_argument("RadialDensityModel: invalid support or coefficients");
    }
    double peak = 0.0;
    for (int i = 0; i <= 200; ++i) {
        peak = std::max(peak, (*this)(r_min_ + (r_max_ - r_min_) * i / 200.0));
    }
    floor_ = 1e-9 * peak;
}

RadialDensityModel RadialDensityModel::with_support(double r_min, double r_max) const {
    if (!(r_min >= 0.0) || !(r_min < r_max)) {
        throw std::invalid_argument("with_support: invalid window");
    }
    RadialDensityModel out = *this;
    out.r_min_ = r_min;
    out.r_max_ = r_max;
    double peak = 0.0;
    for (int i = 0; i <= 200; ++i) {
        peak = std::max(peak, out(r_min + (r_max - r_min) * i / 200.0));
    }
    out.floor_ = 1e-9 * peak;
    return out;
}

RadialDensityModel RadialDensityModel::power_law(int k, double r_min, double r_max) {
    if (k < 1) throw std::invalid_argument("power_law: k must be >= 1");
    // Expand k^2 (c + h t)^(2k-2) / pi in t.
    const int deg = 2 * k - 2;
    const double c = (r_min + r_max) / 2.0, h = (r_max - r_min) / 2.0;
    std::vector<double> coeffs(deg + 1, 0.0);
    double binom = 1.0;
    for (int j = 0; j <= deg; ++j) {
        coeffs[j] = k * k / M_PI * binom * std::pow(c, deg - j) * std::pow(h, j);
        binom *= static_cast<double>(deg - j) / (j + 1);
    }
    // Integral of 2 pi r R1 over the support: k (r_max^2k - r_min^2k).
    const double total = k * (std::pow(r_max, 2 * k) - std::pow(r_min, 2 * k));
    return RadialDensityModel(std::move(coeffs), r_min, r_max, total, deg);
}

double RadialDensityModel::operator()(double r) const {
    const double t = to_t(r);
    double v = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * t + *it;
    return std::max(v, 0.0);
}

double RadialDensityModel::derivative(double r) const {
    const double t = to_t(r);
    double v = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 1;) {
        v = v * t + coeffs_[i] * static_cast<double>(i);
    }
    return v / half_width_;
}

double RadialDensityModel::normalization_integral() const {
    const int n = 512; // composite Simpson, even panel count
    const double h = (r_max_ - r_min_) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double r = r_min_ + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * 2.0 * M_PI * r * (*this)(r);
    }
    return sum * h / 3.0;
}

RadialDensityModel fit_radial_density(std::span<const Spectrum> ensemble, int degree) {
    DensityFitOptions options;
    options.degree = degree;
    return fit_radial_density(ensemble, options);
}

RadialDensityModel fit_radial_density(std::span<const Spectrum> ensemble,
                                      const DensityFitOptions& options) {
    if (ensemble.empty()) throw std::invalid_argument("fit_radial_density: empty ensemble");
    if (options.degree < 0) throw std::invalid_argument("fit_radial_density: negative degree");
    for (const Spectrum& s : ensemble) {
        if (s.source_tag != ensemble.front().source_tag) {
            throw std::invalid_argument("fit_radial_density: mixed source tags '" +
                                        s.source_tag + "' vs '" + ensemble.front().source_tag +
                                        "'");
        }
    }

    std::vector<double> radii;
    for (const Spectrum& s : ensemble) {
        for (const Complex& z : s.eigenvalues) radii.push_back(std::abs(z));
    }
    const std::size_t needed =
        static_cast<std::size_t>(options.min_count_per_coeff) * (options.degree + 1);
    if (radii.size() < needed) {
        throw std::runtime_error("fit_radial_density: " + std::to_string(radii.size()) +
                                 " eigenvalues, need at least " + std::to_string(needed) +
                                 " for degree " + std::to_string(options.degree));
    }

    const auto [lo_it, hi_it] = std::minmax_element(radii.begin(), radii.end());
    const double r_lo = *lo_it, r_hi = *hi_it;
    if (!(r_hi > r_lo)) throw std::runtime_error("fit_radial_density: degenerate radius range");

    // Pooled histogram -> density per unit area per member.
    const int bins = options.bins;
    const double width = (r_hi - r_lo) / bins;
    std::vector<double> counts(bins, 0.0);
    for (double r : radii) {
        int b = static_cast<int>((r - r_lo) / width);
        counts[std::clamp(b, 0, bins - 1)] += 1.0;
    }
    const double members = static_cast<double>(ensemble.size());
    Eigen::VectorXd density(bins), t_mid(bins), weight(bins);
    const double center = (r_lo + r_hi) / 2.0, half_width = (r_hi - r_lo) / 2.0;
    for (int b = 0; b < bins; ++b) {
        const double a = r_lo + b * width, bnd = a + width;
        const double area = M_PI * (bnd * bnd - a * a);
        density(b) = counts[b] / (members * area);
        t_mid(b) = ((a + bnd) / 2.0 - center) / half_width;
        // The variance of a bin's density estimate scales like 1/area, so
        // weight rows by sqrt(area) (normalized below).
        weight(b) = std::sqrt(area);
    }
    weight /= weight.mean();

    // Weighted least squares in the scaled variable.
    Eigen::MatrixXd vander(bins, options.degree + 1);
    for (int b = 0; b < bins; ++b) {
        double p = 1.0;
        for (int j = 0; j <= options.degree; ++j) {
            vander(b, j) = weight(b) * p;
            p *= t_mid(b);
        }
    }
    Eigen::VectorXd coeffs =
        vander.colPivHouseholderQr().solve((density.array() * weight.array()).matrix());

    RadialDensityModel model(std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()),
                             r_lo, r_hi, 0.0, options.degree);

    // Reject fits that dip materially negative over a sizable fraction of the
    // support. Densities that vanish at a support edge graze zero there at
    // noise scale (clamping absorbs that), so only excursions beyond 2% of
    // the fitted peak count.
    const int grid = 1000;
    double peak = 0.0;
    std::vector<double> fit_values(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        const double t = -1.0 + 2.0 * i / grid;
        double v = 0.0;
        for (Eigen::Index j = coeffs.size(); j-- > 0;) v = v * t + coeffs(j);
        fit_values[i] = v;
        peak = std::max(peak, v);
    }
    int negative = 0;
    for (double v : fit_values) negative += (v < -0.02 * peak);
    if (negative > options.max_negative_fraction * (grid + 1)) {
        throw std::runtime_error("fit_radial_density: fit negative over " +
                                 std::to_string(100.0 * negative / (grid + 1)) +
                                 "% of the support");
    }

    // Renormalize the clamped model so that the integral of 2 pi r R1 equals
    // the per-member count.
    const double per_member = static_cast<double>(radii.size()) / members;
    const double integral = model.normalization_integral();
    if (!(integral > 0.0)) throw std::runtime_error("fit_radial_density: vanishing density");
    const double scale = per_member / integral;
    coeffs *= scale;
    return RadialDensityModel(std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()),
                              r_lo, r_hi, per_member, options.degree);
}

// --- serialization ---

namespace {

std::string format17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_spectrum_csv(const std::filesystem::path& csv_path, const Spectrum& s) {
    s.validate();
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
    csv << "re,im\n";
    for (const Complex& z : s.eigenvalues) {
        csv << format17(z.real()) << ',' << format17(z.imag()) << '\n';
    }

    std::filesystem::path meta_path = csv_path;
    meta_path.replace_extension(".meta");
    std::ofstream meta(meta_path, std::ios::binary);
    if (!meta) throw std::runtime_error("cannot open " + meta_path.string() + " for writing");
    meta << "source_tag = " << s.source_tag << '\n';
    meta << "seed = " << s.seed << '\n';
    meta << "params_digest = " << s.params_digest << '\n';
    meta << "dedup = " << (s.dedup_applied ? "true" : "false") << '\n';
    if (s.trim_window) {
        meta << "trim = " << format17(s.trim_window->first) << ' '
             << format17(s.trim_window->second) << '\n';
    } else {
        meta << "trim = none\n";
    }
}

Spectrum read_spectrum_csv(const std::filesystem::path& csv_path) {
    std::ifstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path.string());
    Spectrum s;
    std::string line;
    if (!std::getline(csv, line) || line.rfind("re,im", 0) != 0) {
        throw std::runtime_error(csv_path.string() + ": expected 're,im' header");
    }
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(csv_path.string() + ": malformed row '" + line + "'");
        }
        s.eigenvalues.emplace_back(std::stod(line.substr(0, comma)),
                                   std::stod(line.substr(comma + 1)));
    }

    std::filesystem::path meta_path = csv_path;
    meta_path.replace_extension(".meta");
    std::ifstream meta(meta_path);
    if (meta) {
        while (std::getline(meta, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto strip = [](std::string v) {
                const auto a = v.find_first_not_of(" \t");
                const auto b = v.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
            };
            const std::string key = strip(line.substr(0, eq));
            const std::string value = strip(line.substr(eq + 1));
            if (key == "source_tag") {
                s.source_tag = value;
            } else if (key == "seed") {
                s.seed = std::stoull(value);
            } else if (key == "params_digest") {
                s.params_digest = value;
            } else if (key == "dedup") {
                s.dedup_applied = (value == "true");
            } else if (key == "trim" && value != "none") {
                std::istringstream iss(value);
                double lo = 0, hi = 0;
                iss >> lo >> hi;
                s.trim_window = std::make_pair(lo, hi);
            }
        }
    }
    s.validate();
    return s;
}

} // namespace nhrmt
