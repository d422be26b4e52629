#include "nhrmt/stats.hpp"

#include "nhrmt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nhrmt {

// --- histograms ---

Histogram Histogram::from_samples(std::span<const double> samples, double lo, double hi,
                                  int bins) {
    if (!(hi > lo) || bins < 1) throw std::invalid_argument("Histogram: invalid range or bins");
    Histogram h;
    h.bin_edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.bin_edges[i] = lo + (hi - lo) * i / bins;
    h.counts.assign(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (double x : samples) {
        if (x < lo || x > hi) continue;
        int b = std::min(static_cast<int>((x - lo) / width), bins - 1);
        h.counts[b] += 1.0;
    }
    return h;
}

Histogram Histogram::to_pdf() const {
    if (normalization == Normalization::Pdf) return *this;
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) throw std::runtime_error("Histogram::to_pdf: empty histogram");
    Histogram h = *this;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        h.counts[i] = counts[i] / (total * (bin_edges[i + 1] - bin_edges[i]));
    }
    h.normalization = Normalization::Pdf;
    return h;
}

double Histogram::integral() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        sum += counts[i] * (bin_edges[i + 1] - bin_edges[i]);
    }
    return sum;
}

double sup_norm_diff(const Histogram& a, const Histogram& b) {
    if (a.normalization != Histogram::Normalization::Pdf ||
        b.normalization != Histogram::Normalization::Pdf) {
        throw std::invalid_argument("sup_norm_diff: histograms must be pdf-normalized");
    }
    if (a.bin_edges.size() != b.bin_edges.size()) {
        throw std::invalid_argument("sup_norm_diff: bin grids differ");
    }
    for (std::size_t i = 0; i < a.bin_edges.size(); ++i) {
        if (std::abs(a.bin_edges[i] - b.bin_edges[i]) > 1e-12) {
            throw std::invalid_argument("sup_norm_diff: bin grids differ");
        }
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        sup = std::max(sup, std::abs(a.counts[i] - b.counts[i]));
    }
    return sup;
}

// --- nearest-neighbor machinery ---

namespace {

// Uniform-cell spatial index for nearest and next-nearest neighbor queries.
class NeighborGrid {
public:
    explicit NeighborGrid(std::span<const Complex> pts) : pts_(pts) {
        const int n = static_cast<int>(pts.size());
        double lo_x = pts[0].real(), hi_x = lo_x, lo_y = pts[0].imag(), hi_y = lo_y;
        for (const Complex& p : pts) {
            lo_x = std::min(lo_x, p.real());
            hi_x = std::max(hi_x, p.real());
            lo_y = std::min(lo_y, p.imag());
            hi_y = std::max(hi_y, p.imag());
        }
        const double pad = 1e-9 * (1.0 + std::max(hi_x - lo_x, hi_y - lo_y));
        lo_x_ = lo_x - pad;
        lo_y_ = lo_y - pad;
        const double span_x = hi_x - lo_x + 2.0 * pad;
        const double span_y = hi_y - lo_y + 2.0 * pad;
        cells_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n))), 1, 2048);
        wx_ = span_x / cells_;
        wy_ = span_y / cells_;
        bucket_of_.resize(n);
        std::vector<int> counts(cells_ * cells_ + 1, 0);
        for (int i = 0; i < n; ++i) {
            bucket_of_[i] = cell_of(pts[i]);
            ++counts[bucket_of_[i] + 1];
        }
        std::partial_sum(counts.begin(), counts.end(), counts.begin());
        offsets_ = counts;
        items_.resize(n);
        std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
        for (int i = 0; i < n; ++i) items_[cursor[bucket_of_[i]]++] = i;
    }

    // (nearest, next nearest) indices of pts[i]; -1 when unavailable.
    std::pair<int, int> two_nearest(int i) const {
        const Complex p = pts_[i];
        const int cx = bucket_of_[i] % cells_;
        const int cy = bucket_of_[i] / cells_;
        double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
        int b1 = -1, b2 = -1;
        const double w_min = std::min(wx_, wy_);
        for (int ring = 0; ring < 2 * cells_; ++ring) {
            if (b2 >= 0 && ring > 1) {
                const double reach = (ring - 1) * w_min;
                if (reach * reach > d2) break;
            }
            if (!scan_ring(p, i, cx, cy, ring, d1, b1, d2, b2) && ring > 0 && b2 >= 0) break;
        }
        return {b1, b2};
    }

private:
    int cell_of(const Complex& p) const {
        const int x = std::clamp(static_cast<int>((p.real() - lo_x_) / wx_), 0, cells_ - 1);
        const int y = std::clamp(static_cast<int>((p.imag() - lo_y_) / wy_), 0, cells_ - 1);
        return y * cells_ + x;
    }

    // Returns false when the ring lies entirely outside the grid.
    bool scan_ring(const Complex& p, int self, int cx, int cy, int ring, double& d1, int& b1,
                   double& d2, int& b2) const {
        bool any = false;
        for (int dy = -ring; dy <= ring; ++dy) {
            const int y = cy + dy;
            if (y < 0 || y >= cells_) continue;
            const bool edge_row = std::abs(dy) == ring;
            const int step = edge_row ? 1 : 2 * ring;
            for (int dx = -ring; dx <= ring; dx += (edge_row ? 1 : std::max(step, 1))) {
                const int x = cx + dx;
                if (x < 0 || x >= cells_) continue;
                any = true;
                const int c = y * cells_ + x;
                for (int k = offsets_[c]; k < offsets_[c + 1]; ++k) {
                    const int j = items_[k];
                    if (j == self) continue;
                    const double d = std::norm(pts_[j] - p);
                    if (d < d1) {
                        d2 = d1;
                        b2 = b1;
                        d1 = d;
                        b1 = j;
                    } else if (d < d2) {
                        d2 = d;
                        b2 = j;
                    }
                }
            }
        }
        return any;
    }

    std::span<const Complex> pts_;
    double lo_x_ = 0, lo_y_ = 0, wx_ = 1, wy_ = 1;
    int cells_ = 1;
    std::vector<int> bucket_of_, offsets_, items_;
};

bool in_window(const Complex& z, const RadialWindow& window) {
    if (!window) return true;
    const double r = std::abs(z);
    return r >= window->first && r <= window->second;
}

} // namespace

std::pair<int, int> brute_force_two_nearest(std::span<const Complex> points, int i) {
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    int b1 = -1, b2 = -1;
    for (int j = 0; j < static_cast<int>(points.size()); ++j) {
        if (j == i) continue;
        const double d = std::norm(points[j] - points[i]);
        if (d < d1) {
            d2 = d1;
            b2 = b1;
            d1 = d;
            b1 = j;
        } else if (d < d2) {
            d2 = d;
            b2 = j;
        }
    }
    return {b1, b2};
}

std::vector<double> nn_spacings(const Spectrum& s, const RadialDensityModel* density,
                                const RadialWindow& window) {
    const auto& pts = s.eigenvalues;
    if (pts.size() < 2) throw std::invalid_argument("nn_spacings: need at least 2 eigenvalues");
    NeighborGrid grid(pts);
    std::vector<double> out;
    out.reserve(pts.size());
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        if (!in_window(pts[i], window)) continue;
        const auto [b1, b2] = grid.two_nearest(i);
        (void)b2;
        const double d = std::abs(pts[b1] - pts[i]);
        if (d == 0.0) throw std::runtime_error("nn_spacings: duplicate eigenvalues");
        if (density != nullptr) {
            // A pair midpoint can fall just outside the density support when
            // the neighbor of a window-edge eigenvalue points outward; such
            // pairs (a sub-percent fraction) carry no usable local density
            // and are skipped.
            if (!density->in_support(std::abs((pts[i] + pts[b1]) / 2.0))) continue;
            out.push_back(local_unfold_spacing(pts[i], pts[b1], *density));
        } else {
            out.push_back(d);
        }
    }
    return out;
}

double fit_small_s_exponent(const Histogram& pdf, double s_max_fit) {
    if (pdf.normalization != Histogram::Normalization::Pdf) {
        throw std::invalid_argument("fit_small_s_exponent: histogram must be pdf-normalized");
    }
    std::vector<double> log_s, log_p;
    for (std::size_t i = 0; i < pdf.counts.size(); ++i) {
        const double center = pdf.bin_center(i);
        if (center >= s_max_fit) break;
        if (pdf.counts[i] <= 0.0) continue;
        log_s.push_back(std::log(center));
        log_p.push_back(std::log(pdf.counts[i]));
    }
    if (log_s.size() < 4) {
        throw std::runtime_error("fit_small_s_exponent: only " + std::to_string(log_s.size()) +
                                 " populated bins below " + std::to_string(s_max_fit));
    }
    const double n = static_cast<double>(log_s.size());
    const double mx = std::accumulate(log_s.begin(), log_s.end(), 0.0) / n;
    const double my = std::accumulate(log_p.begin(), log_p.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_s.size(); ++i) {
        sxx += (log_s[i] - mx) * (log_s[i] - mx);
        sxy += (log_s[i] - mx) * (log_p[i] - my);
    }
    return sxy / sxx;
}

std::vector<double> spacing_ratio_type1(const Spectrum& s, const RadialWindow& window) {
    const auto& pts = s.eigenvalues;
    if (pts.size() < 3) throw std::invalid_argument("spacing_ratio_type1: need >= 3 eigenvalues");
    NeighborGrid grid(pts);
    std::vector<double> out;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        if (!in_window(pts[i], window)) continue;
        const auto [b, c] = grid.two_nearest(i);
        const double ab = std::abs(pts[b] - pts[i]);
        const double ac = std::abs(pts[c] - pts[i]);
        if (ab == 0.0 || ac == 0.0) {
            throw std::runtime_error("spacing_ratio_type1: duplicate eigenvalues");
        }
        out.push_back(ab / ac);
    }
    return out;
}

std::vector<double> spacing_ratio_type2(const Spectrum& s, const RadialWindow& window) {
    const auto& pts = s.eigenvalues;
    // Two points are each other's nearest neighbors; all pairs excluded.
    if (pts.size() < 2) throw std::invalid_argument("spacing_ratio_type2: need >= 2 eigenvalues");
    NeighborGrid grid(pts);
    std::vector<int> nn(pts.size());
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) nn[i] = grid.two_nearest(i).first;
    std::vector<double> out;
    for (int a = 0; a < static_cast<int>(pts.size()); ++a) {
        if (!in_window(pts[a], window)) continue;
        const int b = nn[a];
        const int c = nn[b];
        if (c == a) continue; // mutual nearest neighbors
        const double ab = std::abs(pts[b] - pts[a]);
        const double bc = std::abs(pts[c] - pts[b]);
        if (ab == 0.0 || bc == 0.0) {
            throw std::runtime_error("spacing_ratio_type2: duplicate eigenvalues");
        }
        const double r = ab / bc;
        out.push_back(std::min(r, 1.0 / r));
    }
    return out;
}

// --- number variance ---

namespace {

struct CountMatrix {
    // counts[center][member]
    std::vector<std::vector<long>> counts;
};

void finalize_target(const CountMatrix& cm, int batches, VarianceCurve& curve, double target) {
    const std::size_t n_centers = cm.counts.size();
    double sum = 0.0, sum_sq = 0.0;
    std::size_t total = 0;
    for (const auto& row : cm.counts) {
        for (long c : row) {
            sum += static_cast<double>(c);
            sum_sq += static_cast<double>(c) * static_cast<double>(c);
            ++total;
        }
    }
    const double mean = sum / static_cast<double>(total);
    const double sigma2 = sum_sq / static_cast<double>(total) - mean * mean;

    // Batch means over centers: centers are weakly dependent through spatial
    // overlap, members are independent, so batching by center captures both.
    std::vector<double> batch_sigma2;
    const std::size_t per_batch = n_centers / batches;
    for (int b = 0; b < batches && per_batch > 0; ++b) {
        double bs = 0.0, bss = 0.0;
        std::size_t bn = 0;
        for (std::size_t ci = b * per_batch; ci < (b + 1) * per_batch; ++ci) {
            for (long c : cm.counts[ci]) {
                bs += static_cast<double>(c);
                bss += static_cast<double>(c) * static_cast<double>(c);
                ++bn;
            }
        }
        const double bm = bs / static_cast<double>(bn);
        batch_sigma2.push_back(bss / static_cast<double>(bn) - bm * bm);
    }
    double se = 0.0;
    if (batch_sigma2.size() > 1) {
        const double bmean =
            std::accumulate(batch_sigma2.begin(), batch_sigma2.end(), 0.0) / batch_sigma2.size();
        double var = 0.0;
        for (double v : batch_sigma2) var += (v - bmean) * (v - bmean);
        var /= (batch_sigma2.size() - 1);
        se = std::sqrt(var / batch_sigma2.size());
    }

    curve.targets.push_back(target);
    curve.n_mean.push_back(mean);
    curve.sigma2.push_back(sigma2);
    curve.std_error.push_back(se);
}

// Uniform-area draw from the annulus [lo, hi].
Complex draw_annulus(rng::Stream& stream, double lo, double hi) {
    const double u = stream.uniform();
    const double r = std::sqrt(lo * lo + u * (hi * hi - lo * lo));
    return std::polar(r, stream.uniform(0.0, 2.0 * M_PI));
}

void check_variance_options(const VarianceOptions& options) {
    if (options.targets.empty()) throw std::invalid_argument("number_variance: no targets");
    for (double t : options.targets) {
        if (!(t >= 0.0)) throw std::invalid_argument("number_variance: negative target");
    }
    if (options.centers < options.batches || options.batches < 1) {
        throw std::invalid_argument("number_variance: need centers >= batches >= 1");
    }
    if (!(options.region_r_max > options.region_r_min) || options.region_r_min < 0.0) {
        throw std::invalid_argument("number_variance: invalid counting region");
    }
}

} // namespace

VarianceCurve number_variance(std::span<const Spectrum> members,
                              const RadialDensityModel* density,
                              const VarianceOptions& options) {
    check_variance_options(options);
    if (members.empty()) throw std::invalid_argument("number_variance: no spectra");

    VarianceCurve curve;
    curve.centers_used = options.centers;
    for (std::size_t ti = 0; ti < options.targets.size(); ++ti) {
        const double target = options.targets[ti];
        const double radius = std::sqrt(target);
        rng::Stream stream(rng::derive_seed(options.seed, ti));
        CountMatrix cm;
        cm.counts.assign(options.centers, std::vector<long>(members.size(), 0));

        if (density == nullptr) {
            // Discs of radius sqrt(target) in the admissible annulus.
            const double lo = options.region_r_min > 0.0 ? options.region_r_min + radius : 0.0;
            const double hi = options.region_r_max - radius;
            if (!(hi > lo)) {
                throw std::runtime_error("number_variance: no admissible centers for target " +
                                         std::to_string(target));
            }
            std::vector<Complex> centers(options.centers);
            for (auto& c : centers) c = draw_annulus(stream, lo, hi);
            const double r_sq = radius * radius;
            parallel_for(centers.size(), options.threads, [&](std::size_t ci) {
                for (std::size_t mi = 0; mi < members.size(); ++mi) {
                    long n = 0;
                    for (const Complex& z : members[mi].eigenvalues) {
                        if (std::norm(z - centers[ci]) <= r_sq) ++n;
                    }
                    cm.counts[ci][mi] = n;
                }
            });
        } else {
            // Isochrones of unfolded radius sqrt(target); rejection on support
            // exit. Candidates are drawn sequentially so the accepted set does
            // not depend on thread scheduling.
            std::vector<IsochroneCurve> accepted;
            accepted.reserve(options.centers);
            const int wave = std::max(2 * options.centers, 32);
            int attempts = 0;
            const int max_attempts = 100 * options.centers;
            while (static_cast<int>(accepted.size()) < options.centers &&
                   attempts < max_attempts) {
                std::vector<Complex> candidates(wave);
                for (auto& c : candidates) {
                    c = draw_annulus(stream, options.region_r_min, options.region_r_max);
                }
                attempts += wave;
                std::vector<std::optional<IsochroneCurve>> built(wave);
                parallel_for(candidates.size(), options.threads, [&](std::size_t i) {
                    try {
                        built[i] = isochrone(*density, candidates[i], radius, options.n_dirs,
                                             options.geodesic_step);
                    } catch (const SupportExit&) {
                        built[i] = std::nullopt;
                    } catch (const std::runtime_error&) {
                        built[i] = std::nullopt; // self-intersecting polygon
                    }
                });
                for (auto& b : built) {
                    if (static_cast<int>(accepted.size()) >= options.centers) break;
                    if (b) accepted.push_back(std::move(*b));
                }
            }
            if (static_cast<int>(accepted.size()) < options.centers) {
                throw std::runtime_error(
                    "number_variance: admissible region empty for target " +
                    std::to_string(target) + " (accepted " + std::to_string(accepted.size()) +
                    " of " + std::to_string(options.centers) + " centers)");
            }
            parallel_for(accepted.size(), options.threads, [&](std::size_t ci) {
                for (std::size_t mi = 0; mi < members.size(); ++mi) {
                    cm.counts[ci][mi] = count_inside(members[mi], accepted[ci]);
                }
            });
        }
        finalize_target(cm, options.batches, curve, target);
    }
    return curve;
}

VarianceCurve number_variance_unfolded(std::span<const UnfoldedSpectrum> members,
                                       const VarianceOptions& options) {
    check_variance_options(options);
    if (members.empty()) throw std::invalid_argument("number_variance_unfolded: no spectra");
    const int sheets = members.front().sheets;
    for (const auto& m : members) {
        if (m.sheets != sheets) {
            throw std::invalid_argument("number_variance_unfolded: mixed sheet counts");
        }
    }
    const double period = 2.0 * M_PI * sheets;

    // Flatten member points to (radius, cover angle).
    struct CoverPoint {
        double r, theta;
    };
    std::vector<std::vector<CoverPoint>> pts(members.size());
    for (std::size_t mi = 0; mi < members.size(); ++mi) {
        pts[mi].reserve(members[mi].points.size());
        for (std::size_t i = 0; i < members[mi].points.size(); ++i) {
            pts[mi].push_back({members[mi].points[i].radius, members[mi].cover_angle(i)});
        }
    }

    VarianceCurve curve;
    curve.centers_used = options.centers;
    for (std::size_t ti = 0; ti < options.targets.size(); ++ti) {
        const double target = options.targets[ti];
        const double radius = std::sqrt(target);
        rng::Stream stream(rng::derive_seed(options.seed, ti));
        const double lo = options.region_r_min + radius;
        const double hi = options.region_r_max - radius;
        if (!(hi > lo)) {
            throw std::runtime_error("number_variance_unfolded: no admissible centers for target " +
                                     std::to_string(target));
        }
        struct Center {
            double r, theta;
        };
        std::vector<Center> centers(options.centers);
        for (auto& c : centers) {
            const double u = stream.uniform();
            c.r = std::sqrt(lo * lo + u * (hi * hi - lo * lo));
            c.theta = stream.uniform(0.0, period);
        }

        CountMatrix cm;
        cm.counts.assign(options.centers, std::vector<long>(members.size(), 0));
        const double r_sq = radius * radius;
        parallel_for(centers.size(), options.threads, [&](std::size_t ci) {
            const Center c = centers[ci];
            for (std::size_t mi = 0; mi < pts.size(); ++mi) {
                long n = 0;
                for (const CoverPoint& p : pts[mi]) {
                    double d = std::fmod(p.theta - c.theta, period);
                    if (d > period / 2.0) d -= period;
                    if (d < -period / 2.0) d += period;
                    // Points more than pi away on the cover sit on another
                    // sheet; the disc cannot reach them.
                    if (std::abs(d) > M_PI) continue;
                    const double chord_sq =
                        p.r * p.r + c.r * c.r - 2.0 * p.r * c.r * std::cos(d);
                    if (chord_sq <= r_sq) ++n;
                }
                cm.counts[ci][mi] = n;
            }
        });
        finalize_target(cm, options.batches, curve, target);
    }
    return curve;
}

VarianceCurve number_variance_region(std::span<const std::vector<Complex>> member_points,
                                     std::span<const Complex> boundary_polygon,
                                     double central_exclusion_radius,
                                     const VarianceOptions& options) {
    if (options.targets.empty()) throw std::invalid_argument("number_variance_region: no targets");
    if (member_points.empty() || boundary_polygon.size() < 3) {
        throw std::invalid_argument("number_variance_region: missing points or boundary");
    }

    IsochroneCurve region;
    region.vertices.assign(boundary_polygon.begin(), boundary_polygon.end());
    region.directions = static_cast<int>(boundary_polygon.size());

    double lo_x = boundary_polygon[0].real(), hi_x = lo_x;
    double lo_y = boundary_polygon[0].imag(), hi_y = lo_y;
    for (const Complex& v : boundary_polygon) {
        lo_x = std::min(lo_x, v.real());
        hi_x = std::max(hi_x, v.real());
        lo_y = std::min(lo_y, v.imag());
        hi_y = std::max(hi_y, v.imag());
    }
    auto distance_to_boundary = [&](const Complex& p) {
        double best = std::numeric_limits<double>::infinity();
        const std::size_t n = boundary_polygon.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Complex a = boundary_polygon[i];
            const Complex b = boundary_polygon[(i + 1) % n];
            const Complex ab = b - a;
            const double len_sq = std::norm(ab);
            double t = len_sq > 0.0
                           ? ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) /
                                 len_sq
                           : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best, std::abs(p - (a + t * ab)));
        }
        return best;
    };

    VarianceCurve curve;
    curve.centers_used = options.centers;
    for (std::size_t ti = 0; ti < options.targets.size(); ++ti) {
        const double target = options.targets[ti];
        const double radius = std::sqrt(target);
        rng::Stream stream(rng::derive_seed(options.seed, ti));

        std::vector<Complex> centers;
        centers.reserve(options.centers);
        const int max_attempts = 10000 * std::max(options.centers, 1);
        int attempts = 0;
        std::vector<Complex> one(1);
        while (static_cast<int>(centers.size()) < options.centers && attempts < max_attempts) {
            ++attempts;
            const Complex c(stream.uniform(lo_x, hi_x), stream.uniform(lo_y, hi_y));
            if (std::abs(c) < central_exclusion_radius + radius) continue;
            one[0] = c;
            if (count_inside(std::span<const Complex>(one), region) == 0) continue;
            if (distance_to_boundary(c) < radius) continue;
            centers.push_back(c);
        }
        if (static_cast<int>(centers.size()) < options.centers) {
            throw std::runtime_error("number_variance_region: admissible region empty for target " +
                                     std::to_string(target));
        }

        CountMatrix cm;
        cm.counts.assign(options.centers, std::vector<long>(member_points.size(), 0));
        const double r_sq = radius * radius;
        parallel_for(centers.size(), options.threads, [&](std::size_t ci) {
            for (std::size_t mi = 0; mi < member_points.size(); ++mi) {
                long n = 0;
                for (const Complex& z : member_points[mi]) {
                    if (std::norm(z - centers[ci]) <= r_sq) ++n;
                }
                cm.counts[ci][mi] = n;
            }
        });
        finalize_target(cm, options.batches, curve, target);
    }
    return curve;
}

// --- analytic number variance ---

double bessel_i0_scaled(double x) {
    x = std::abs(x);
    if (x < 600.0) {
        // All-positive power series for I0, scaled afterwards; stable because
        // there is no cancellation.
        const double q = x * x / 4.0;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 4000; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum * std::exp(-x);
    }
    // Asymptotic series; truncation error is negligible at this magnitude.
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 20; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd / (8.0 * static_cast<double>(k) * x);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * M_PI * x);
}

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                            double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = (a + b) / 2.0;
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

} // namespace

double sigma2_ginibre_analytic(double n_mean, double abs_tol) {
    if (n_mean < 0.0) throw std::invalid_argument("sigma2_ginibre_analytic: negative <n>");
    if (n_mean == 0.0) return 0.0;
    // Substituting eta = u^2 maps [0, n]^2 to [0, L]^2 with L = sqrt(n) and
    // turns the integrand into 4 u v I0e(2uv) exp(-(u - v)^2), which stays
    // O(1) for all n.
    const double L = std::sqrt(n_mean);
    const double inner_tol = abs_tol / (4.0 * std::max(L, 1.0));
    auto inner = [&](double u) {
        if (u == 0.0) return 0.0;
        return adaptive_simpson(
            [&](double v) {
                const double d = u - v;
                return 4.0 * u * v * bessel_i0_scaled(2.0 * u * v) * std::exp(-d * d);
            },
            0.0, L, inner_tol);
    };
    const double integral = adaptive_simpson(inner, 0.0, L, abs_tol / 2.0);
    return n_mean - integral;
}

double sigma2_selfdual_analytic(double n_mean, double abs_tol) {
    if (n_mean < 0.0) throw std::invalid_argument("sigma2_selfdual_analytic: negative <n>");
    return sigma2_ginibre_analytic(n_mean / std::sqrt(2.0), abs_tol);
}

double r2_ginibre(Complex z1, Complex z2) {
    return (1.0 - std::exp(-std::norm(z1 - z2))) / (M_PI * M_PI);
}

} // namespace nhrmt
