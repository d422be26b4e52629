#include "nhrmt/unfolding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace nhrmt {

namespace {

double angle_in_2pi(Complex z) {
    double t = std::arg(z);
    if (t < 0.0) t += 2.0 * M_PI;
    return t;
}

// rho = pi R1, with support/floor checks.
struct ConformalMetric {
    const RadialDensityModel& density;

    double rho(double r) const {
        if (!density.in_support(r)) {
            throw SupportExit("geodesic left the density support at r = " + std::to_string(r));
        }
        const double value = M_PI * density(r);
        if (value <= M_PI * density.density_floor()) {
            throw SupportExit("geodesic reached degenerate metric at r = " + std::to_string(r));
        }
        return value;
    }

    // d(ln rho)/dr / 2 = phi'(r) for the conformal factor phi = ln(rho)/2.
    double dphi(double r) const {
        const double r1 = density(r);
        if (r1 <= density.density_floor()) {
            throw SupportExit("geodesic reached degenerate metric at r = " + std::to_string(r));
        }
        return 0.5 * density.derivative(r) / r1;
    }
};

struct GeoState {
    double x, y, vx, vy;
};

// Geodesic equations of ds^2 = e^(2 phi)(dx^2 + dy^2) in an affine parameter:
// x'' = -phi_x (x'^2 - y'^2) - 2 phi_y x' y', and symmetrically for y.
GeoState rhs(const ConformalMetric& metric, const GeoState& s) {
    const double r = std::hypot(s.x, s.y);
    double gx = 0.0, gy = 0.0;
    if (r > 1e-300) {
        if (!metric.density.in_support(r)) {
            throw SupportExit("geodesic left the density support at r = " + std::to_string(r));
        }
        const double d = metric.dphi(r);
        gx = d * s.x / r;
        gy = d * s.y / r;
    }
    const double ax = -gx * (s.vx * s.vx - s.vy * s.vy) - 2.0 * gy * s.vx * s.vy;
    const double ay = -gy * (s.vy * s.vy - s.vx * s.vx) - 2.0 * gx * s.vx * s.vy;
    return {s.vx, s.vy, ax, ay};
}

// Radial geodesic from the origin: the exact solution for a circularly
// symmetric metric, used when the metric is degenerate at the launch point
// (power-law densities). Solves integral_0^r sqrt(rho) dr' = s by bisection
// on the Simpson cumulative.
double radial_arclength_inverse(const ConformalMetric& metric, double s) {
    const double r_hi = metric.density.r_max();
    auto arclen = [&](double r) {
        const int n = 256;
        const double h = r / n;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            sum += w * std::sqrt(M_PI * metric.density(i * h));
        }
        return sum * h / 3.0;
    };
    if (arclen(r_hi) < s) {
        throw SupportExit("radial geodesic of length " + std::to_string(s) +
                          " leaves the density support");
    }
    double lo = 0.0, hi = r_hi;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * r_hi; ++it) {
        const double mid = (lo + hi) / 2.0;
        (arclen(mid) < s ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
}

} // namespace

double IsochroneCurve::signed_area() const {
    double twice_area = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex& a = vertices[i];
        const Complex& b = vertices[(i + 1) % n];
        twice_area += a.real() * b.imag() - b.real() * a.imag();
    }
    return twice_area / 2.0;
}

bool IsochroneCurve::is_simple() const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    auto orient = [](Complex a, Complex b, Complex c) {
        const double v = (b.real() - a.real()) * (c.imag() - a.imag()) -
                         (b.imag() - a.imag()) * (c.real() - a.real());
        return (v > 0.0) - (v < 0.0);
    };
    auto segments_cross = [&](std::size_t i, std::size_t j) {
        const Complex a = vertices[i], b = vertices[(i + 1) % n];
        const Complex c = vertices[j], d = vertices[(j + 1) % n];
        return orient(a, b, c) != orient(a, b, d) && orient(c, d, a) != orient(c, d, b);
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // adjacent through the wrap
            if (segments_cross(i, j)) return false;
        }
    }
    return true;
}

Complex UnfoldedSpectrum::plane_point(std::size_t i) const {
    const UnfoldedPoint& p = points[i];
    return std::polar(p.radius, p.angle);
}

double UnfoldedSpectrum::cover_angle(std::size_t i) const {
    const UnfoldedPoint& p = points[i];
    return p.angle + 2.0 * M_PI * p.sheet;
}

double local_unfold_spacing(Complex a, Complex b, const RadialDensityModel& density) {
    const double r_mid = std::abs((a + b) / 2.0);
    if (!density.in_support(r_mid)) {
        throw std::invalid_argument("local_unfold_spacing: pair midpoint at r = " +
                                    std::to_string(r_mid) + " is outside the density support");
    }
    return std::sqrt(M_PI * density(r_mid)) * std::abs(a - b);
}

Complex geodesic_shoot(const RadialDensityModel& density, Complex center, Complex direction,
                       double s, double step) {
    return geodesic_shoot_full(density, center, direction, s, step).point;
}

GeodesicEnd geodesic_shoot_full(const RadialDensityModel& density, Complex center,
                                Complex direction, double s, double step) {
    if (!(s > 0.0)) throw std::invalid_argument("geodesic_shoot: arclength must be positive");
    const double dir_norm = std::abs(direction);
    if (!(dir_norm > 0.0)) throw std::invalid_argument("geodesic_shoot: zero direction");
    const ConformalMetric metric{density};

    const double r0 = std::abs(center);
    if (!density.in_support(r0) && !(r0 < density.r_min() && density.r_min() < 1e-9 * density.r_max())) {
        throw SupportExit("geodesic_shoot: center at r = " + std::to_string(r0) +
                          " is outside the density support");
    }

    // Degenerate metric at the launch point: exact radial solution.
    if (r0 <= 1e-12 * density.r_max() || M_PI * density(r0) <= M_PI * density.density_floor()) {
        if (r0 > 1e-9 * density.r_max()) {
            throw SupportExit("geodesic_shoot: degenerate metric at launch radius " +
                              std::to_string(r0));
        }
        const double r_end = radial_arclength_inverse(metric, s);
        return {center + (direction / dir_norm) * r_end, direction / dir_norm};
    }

    if (step <= 0.0) step = s / 2000.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(s / step)));
    const double h = s / steps;

    // Unit metric speed: |v| = 1/sqrt(rho) makes the affine parameter the
    // unfolded arclength.
    const double v0 = 1.0 / std::sqrt(metric.rho(r0));
    GeoState state{center.real(), center.imag(), v0 * direction.real() / dir_norm,
                   v0 * direction.imag() / dir_norm};

    for (int i = 0; i < steps; ++i) {
        const GeoState k1 = rhs(metric, state);
        const GeoState k2 = rhs(metric, {state.x + 0.5 * h * k1.x, state.y + 0.5 * h * k1.y,
                                         state.vx + 0.5 * h * k1.vx, state.vy + 0.5 * h * k1.vy});
        const GeoState k3 = rhs(metric, {state.x + 0.5 * h * k2.x, state.y + 0.5 * h * k2.y,
                                         state.vx + 0.5 * h * k2.vx, state.vy + 0.5 * h * k2.vy});
        const GeoState k4 = rhs(metric, {state.x + h * k3.x, state.y + h * k3.y,
                                         state.vx + h * k3.vx, state.vy + h * k3.vy});
        state.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        state.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        state.vx += h / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx);
        state.vy += h / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy);

        // Metric speed is conserved along geodesics; project out integration
        // drift so the parameter stays the unfolded arclength.
        const double r = std::hypot(state.x, state.y);
        const double speed = std::sqrt(metric.rho(r)) * std::hypot(state.vx, state.vy);
        state.vx /= speed;
        state.vy /= speed;
    }
    const double v_norm = std::hypot(state.vx, state.vy);
    return {{state.x, state.y}, {state.vx / v_norm, state.vy / v_norm}};
}

IsochroneCurve isochrone(const RadialDensityModel& density, Complex center, double s, int n_dirs,
                         double step) {
    if (n_dirs < 16) throw std::invalid_argument("isochrone: need at least 16 directions");
    IsochroneCurve curve;
    curve.center = center;
    curve.arc_radius = s;
    curve.directions = n_dirs;
    curve.vertices.resize(n_dirs);
    for (int d = 0; d < n_dirs; ++d) {
        const double angle = 2.0 * M_PI * d / n_dirs;
        try {
            curve.vertices[d] =
                geodesic_shoot(density, center, std::polar(1.0, angle), s, step);
        } catch (const SupportExit& e) {
            throw SupportExit("isochrone: ray " + std::to_string(d) + " of " +
                              std::to_string(n_dirs) + ": " + e.what());
        }
    }
    if (!curve.is_simple()) {
        throw std::runtime_error("isochrone: polygon self-intersects (s too large for this center?)");
    }
    return curve;
}

long count_inside(std::span<const Complex> points, const IsochroneCurve& curve) {
    const std::size_t n = curve.vertices.size();
    if (n < 3 || std::abs(curve.signed_area()) < 1e-12) {
        throw std::invalid_argument("count_inside: degenerate polygon");
    }
    double lo_x = curve.vertices[0].real(), hi_x = lo_x;
    double lo_y = curve.vertices[0].imag(), hi_y = lo_y;
    for (const Complex& v : curve.vertices) {
        lo_x = std::min(lo_x, v.real());
        hi_x = std::max(hi_x, v.real());
        lo_y = std::min(lo_y, v.imag());
        hi_y = std::max(hi_y, v.imag());
    }

    long count = 0;
    for (const Complex& p : points) {
        const double x = p.real(), y = p.imag();
        if (x < lo_x || x > hi_x || y < lo_y || y > hi_y) continue;

        // Crossing parity with an explicit boundary test (boundary is inside).
        bool inside = false;
        bool boundary = false;
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Complex& a = curve.vertices[j];
            const Complex& b = curve.vertices[i];
            const double cross = (b.real() - a.real()) * (y - a.imag()) -
                                 (b.imag() - a.imag()) * (x - a.real());
            if (std::abs(cross) < 1e-14 &&
                x >= std::min(a.real(), b.real()) - 1e-14 &&
                x <= std::max(a.real(), b.real()) + 1e-14 &&
                y >= std::min(a.imag(), b.imag()) - 1e-14 &&
                y <= std::max(a.imag(), b.imag()) + 1e-14) {
                boundary = true;
                break;
            }
            if ((b.imag() > y) != (a.imag() > y)) {
                const double x_cross = b.real() + (y - b.imag()) * (a.real() - b.real()) /
                                                      (a.imag() - b.imag());
                if (x < x_cross) inside = !inside;
            }
        }
        if (inside || boundary) ++count;
    }
    return count;
}

long count_inside(const Spectrum& s, const IsochroneCurve& curve) {
    return count_inside(std::span<const Complex>(s.eigenvalues), curve);
}

void write_isochrone_csv(const std::filesystem::path& path, const IsochroneCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "re,im\n";
    char buf[128];
    for (const Complex& v : curve.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", v.real(), v.imag());
        out << buf;
    }
}

UnfoldedSpectrum unfold_power_law(const Spectrum& s, int k) {
    if (k < 1) throw std::invalid_argument("unfold_power_law: k must be >= 1");
    s.validate();
    UnfoldedSpectrum u;
    u.map_tag = "power-law-k" + std::to_string(k);
    u.sheets = k;
    u.points.reserve(s.eigenvalues.size());
    for (const Complex& z : s.eigenvalues) {
        const double theta_cover = k * angle_in_2pi(z);
        const int sheet = std::min(k - 1, static_cast<int>(theta_cover / (2.0 * M_PI)));
        u.points.push_back(
            {std::pow(std::abs(z), k), theta_cover - 2.0 * M_PI * sheet, sheet});
    }
    return u;
}

UnfoldedSpectrum unfold_radial_only(const Spectrum& s, int k) {
    if (k < 1) throw std::invalid_argument("unfold_radial_only: k must be >= 1");
    s.validate();
    UnfoldedSpectrum u;
    u.map_tag = "control-radial-k" + std::to_string(k);
    u.sheets = 1;
    u.points.reserve(s.eigenvalues.size());
    // Cumulative radial map: pi r~^2 / pi = integral of 2 pi r' R1 dr', i.e.
    // r~ = sqrt(k) r^k for R1 = k^2 r^(2k-2)/pi. Angles are untouched, so
    // neighbor ordering is not preserved.
    const double root_k = std::sqrt(static_cast<double>(k));
    for (const Complex& z : s.eigenvalues) {
        u.points.push_back({root_k * std::pow(std::abs(z), k), angle_in_2pi(z), 0});
    }
    return u;
}

UnfoldedSpectrum unfold_cartesian(const Spectrum& s) {
    s.validate();
    UnfoldedSpectrum u;
    u.map_tag = "control-cartesian-k2";
    u.sheets = 1;
    u.points.reserve(s.eigenvalues.size());
    for (const Complex& z : s.eigenvalues) {
        const double x = z.real(), y = z.imag();
        const Complex mapped(4.0 / 3.0 * x * x * x + 4.0 * x * y * y, y);
        u.points.push_back({std::abs(mapped), angle_in_2pi(mapped), 0});
    }
    return u;
}

double metric_curvature(const RadialDensityModel& density, double r) {
    const double width = density.r_max() - density.r_min();
    const double h = 1e-4 * width;
    if (r - h <= density.r_min() || r + h >= density.r_max()) {
        throw std::invalid_argument("metric_curvature: r = " + std::to_string(r) +
                                    " too close to the support edge");
    }
    auto log_rho = [&](double rr) {
        const double value = M_PI * density(rr);
        if (value <= 0.0) {
            throw std::invalid_argument("metric_curvature: density vanishes at r = " +
                                        std::to_string(rr));
        }
        return std::log(value);
    };
    const double lm = log_rho(r - h), l0 = log_rho(r), lp = log_rho(r + h);
    const double d1 = (lp - lm) / (2.0 * h);
    const double d2 = (lp - 2.0 * l0 + lm) / (h * h);
    const double laplacian = d2 + d1 / r;
    return -laplacian / (2.0 * M_PI * density(r));
}

} // namespace nhrmt
