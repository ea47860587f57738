#pragma once

// Planar coverage model.  Server i with queue length n serves clients within
// radius speed * (psi - (n+1)/mu_i), floored at zero.  The covered part of
// the region decomposes into exclusive areas (reachable by one server) and
// common areas (reachable by a specific subset of >= 2 servers); areas map
// to arrival rates through the uniform areal rate.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdn::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool contains(const Point& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

struct ServerLayout {
    std::vector<Point> positions;
    std::vector<double> service_rates; // mu_i
    double psi = 1.0;                  // latency bound
    Rect region;
    double areal_rate = 0.0;           // lambda / area(region)
    double speed_factor = 1.0;         // distance per unit transmission time

    std::size_t size() const { return positions.size(); }
    double total_arrival_rate() const { return areal_rate * region.area(); }

    void validate() const {
        if (positions.empty() || positions.size() != service_rates.size())
            throw std::invalid_argument("ServerLayout: positions and service_rates must be non-empty and equal length");
        for (double mu : service_rates)
            if (!(mu > 0.0)) throw std::invalid_argument("ServerLayout: service rates must be > 0");
        if (!(psi > 0.0)) throw std::invalid_argument("ServerLayout: psi must be > 0");
        if (!(region.area() > 0.0)) throw std::invalid_argument("ServerLayout: region must have positive area");
        if (!(areal_rate >= 0.0)) throw std::invalid_argument("ServerLayout: areal_rate must be >= 0");
        if (!(speed_factor > 0.0)) throw std::invalid_argument("ServerLayout: speed_factor must be > 0");
    }
};

// Lemma bound on queue length: once n = ceil(psi*mu - 1) the radius is zero,
// no further arrivals are feasible and the queue cannot grow.
inline long long queue_bound(const ServerLayout& layout, std::size_t server) {
    return static_cast<long long>(std::ceil(layout.psi * layout.service_rates[server] - 1.0));
}

inline double radius(const ServerLayout& layout, std::size_t server, long long queue) {
    if (queue < 0) throw std::invalid_argument("radius: queue length must be >= 0");
    const double slack = layout.psi - (static_cast<double>(queue) + 1.0) / layout.service_rates[server];
    return layout.speed_factor * std::max(0.0, slack);
}

struct CoverageState {
    std::vector<long long> queue_lengths;

    static CoverageState empty(std::size_t m) { return CoverageState{std::vector<long long>(m, 0)}; }

    std::vector<double> radii(const ServerLayout& layout) const {
        if (queue_lengths.size() != layout.size())
            throw std::invalid_argument("CoverageState: queue vector length mismatch");
        std::vector<double> r(layout.size());
        for (std::size_t i = 0; i < layout.size(); ++i) r[i] = radius(layout, i, queue_lengths[i]);
        return r;
    }
};

struct CommonRegion {
    std::vector<int> servers; // ascending, size >= 2
    double rate = 0.0;
};

struct AreaDecomposition {
    std::vector<double> exclusive_rates;      // per server
    std::vector<CommonRegion> common_regions; // rate > 0 subsets only
    double total_covered_rate = 0.0;

    double partition_residual() const {
        double sum = 0.0;
        for (double r : exclusive_rates) sum += r;
        for (const auto& z : common_regions) sum += z.rate;
        return sum - total_covered_rate;
    }
};

enum class GeometryMode { Exact, MonteCarlo };

inline GeometryMode mode_from_string(const std::string& s) {
    if (s == "exact") return GeometryMode::Exact;
    if (s == "mc" || s == "montecarlo" || s == "monte-carlo") return GeometryMode::MonteCarlo;
    throw std::invalid_argument("unknown geometry mode: " + s);
}

// Conservative binomial standard error of a Monte Carlo area estimate.
inline double mc_area_stderr(double area_estimate, double region_area, std::size_t samples) {
    if (samples == 0) return 0.0;
    const double p = std::clamp(area_estimate / region_area, 0.0, 1.0);
    return region_area * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

namespace detail {

struct Disk {
    Point c;
    double r = 0.0;
    bool contains(const Point& p, double eps = 1e-12) const {
        const double dx = p.x - c.x, dy = p.y - c.y;
        return dx * dx + dy * dy <= (r + eps) * (r + eps);
    }
};

inline double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Area of the intersection of all disks (convex region).  Containments are
// reduced first; the remaining boundary is walked as sorted circle-circle
// vertices joined by circular segments.
inline double disks_intersection_area(std::vector<Disk> disks) {
    constexpr double eps = 1e-12;
    for (const auto& d : disks)
        if (d.r <= 0.0) return 0.0;
    // drop any disk that fully contains another (it cannot bound the intersection)
    for (bool changed = true; changed && disks.size() > 1;) {
        changed = false;
        for (std::size_t i = 0; i < disks.size() && !changed; ++i)
            for (std::size_t j = 0; j < disks.size() && !changed; ++j) {
                if (i == j) continue;
                if (dist(disks[i].c, disks[j].c) <= disks[i].r - disks[j].r + eps) {
                    disks.erase(disks.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                }
            }
    }
    if (disks.size() == 1) return std::numbers::pi * disks[0].r * disks[0].r;
    for (std::size_t i = 0; i < disks.size(); ++i)
        for (std::size_t j = i + 1; j < disks.size(); ++j)
            if (dist(disks[i].c, disks[j].c) >= disks[i].r + disks[j].r) return 0.0;

    // circle-circle intersection vertices lying in every disk
    struct Vertex { Point p; std::size_t a, b; };
    std::vector<Vertex> verts;
    for (std::size_t i = 0; i < disks.size(); ++i) {
        for (std::size_t j = i + 1; j < disks.size(); ++j) {
            const double d = dist(disks[i].c, disks[j].c);
            const double r1 = disks[i].r, r2 = disks[j].r;
            const double a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
            const double h2 = r1 * r1 - a * a;
            if (h2 < 0.0) continue;
            const double h = std::sqrt(h2);
            const double ux = (disks[j].c.x - disks[i].c.x) / d;
            const double uy = (disks[j].c.y - disks[i].c.y) / d;
            const Point base{disks[i].c.x + a * ux, disks[i].c.y + a * uy};
            for (const double sgn : {1.0, -1.0}) {
                const Point v{base.x - sgn * h * uy, base.y + sgn * h * ux};
                bool inside = true;
                for (std::size_t k = 0; k < disks.size() && inside; ++k) {
                    if (k == i || k == j) continue;
                    inside = disks[k].contains(v, 1e-9 * (disks[k].r + 1.0));
                }
                if (inside) verts.push_back({v, i, j});
            }
        }
    }
    if (verts.size() < 2) return 0.0;

    Point centroid{0.0, 0.0};
    for (const auto& v : verts) { centroid.x += v.p.x; centroid.y += v.p.y; }
    centroid.x /= static_cast<double>(verts.size());
    centroid.y /= static_cast<double>(verts.size());
    std::sort(verts.begin(), verts.end(), [&](const Vertex& u, const Vertex& v) {
        return std::atan2(u.p.y - centroid.y, u.p.x - centroid.x) <
               std::atan2(v.p.y - centroid.y, v.p.x - centroid.x);
    });

    double area = 0.0;
    for (std::size_t s = 0; s < verts.size(); ++s) { // shoelace
        const auto& p = verts[s].p;
        const auto& q = verts[(s + 1) % verts.size()].p;
        area += p.x * q.y - q.x * p.y;
    }
    area *= 0.5;

    // Add the circular segment bulging outward on each boundary edge.  The
    // boundary of a region inside every disk runs counterclockwise around
    // each bounding circle's own center, so only CCW sweeps are candidates;
    // the right circle is the one whose arc midpoint stays inside all disks.
    for (std::size_t s = 0; s < verts.size(); ++s) {
        const auto& v1 = verts[s];
        const auto& v2 = verts[(s + 1) % verts.size()];
        double best_segment = -1.0;
        for (std::size_t c = 0; c < disks.size(); ++c) {
            const auto& disk = disks[c];
            const double tol = 1e-7 * (disk.r + 1.0);
            if (std::abs(dist(v1.p, disk.c) - disk.r) > tol) continue;
            if (std::abs(dist(v2.p, disk.c) - disk.r) > tol) continue;
            const double a1 = std::atan2(v1.p.y - disk.c.y, v1.p.x - disk.c.x);
            const double a2 = std::atan2(v2.p.y - disk.c.y, v2.p.x - disk.c.x);
            double sweep = a2 - a1;
            while (sweep <= 0.0) sweep += 2.0 * std::numbers::pi;
            const double amid = a1 + 0.5 * sweep;
            const Point mid{disk.c.x + disk.r * std::cos(amid), disk.c.y + disk.r * std::sin(amid)};
            bool inside = true;
            for (std::size_t k = 0; k < disks.size() && inside; ++k) {
                if (k == c) continue;
                inside = disks[k].contains(mid, 1e-9 * (disks[k].r + 1.0));
            }
            if (!inside) continue;
            const double segment = 0.5 * disk.r * disk.r * (sweep - std::sin(sweep));
            if (best_segment < 0.0 || segment < best_segment) best_segment = segment;
        }
        if (best_segment > 0.0) area += best_segment;
    }
    return area;
}

inline void require_exact_supported(const ServerLayout& layout, const std::vector<double>& radii) {
    if (layout.size() > 3)
        throw std::invalid_argument("exact geometry supports at most 3 servers; use Monte Carlo");
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (radii[i] <= 0.0) continue;
        const auto& p = layout.positions[i];
        if (p.x - radii[i] < layout.region.xmin || p.x + radii[i] > layout.region.xmax ||
            p.y - radii[i] < layout.region.ymin || p.y + radii[i] > layout.region.ymax)
            throw std::invalid_argument("exact geometry requires disks inside the region; use Monte Carlo");
    }
}

// Intersection areas for every nonempty subset, Moebius-inverted into
// exactly-this-subset areas.  Index by bitmask.
inline std::vector<double> exact_subset_areas(const ServerLayout& layout, const std::vector<double>& radii) {
    const std::size_t m = layout.size();
    const std::size_t n_masks = std::size_t{1} << m;
    std::vector<double> inter(n_masks, 0.0);
    for (std::size_t mask = 1; mask < n_masks; ++mask) {
        std::vector<Disk> disks;
        bool dead = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (!(mask & (std::size_t{1} << i))) continue;
            if (radii[i] <= 0.0) { dead = true; break; }
            disks.push_back({layout.positions[i], radii[i]});
        }
        inter[mask] = dead ? 0.0 : disks_intersection_area(std::move(disks));
    }
    std::vector<double> exact(n_masks, 0.0);
    for (std::size_t mask = 1; mask < n_masks; ++mask) {
        double a = 0.0;
        // sum over supersets T of mask: (-1)^{|T|-|mask|} inter[T]
        const std::size_t rest = (n_masks - 1) & ~mask;
        for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
            const std::size_t t = mask | sub;
            const int extra = std::popcount(sub);
            a += (extra % 2 == 0 ? 1.0 : -1.0) * inter[t];
            if (sub == 0) break;
        }
        exact[mask] = std::max(0.0, a);
    }
    return exact;
}

} // namespace detail

// Stratified jittered sample of the region, frozen at construction so the
// same point set is reused across states (common random numbers).
class RegionSampler {
public:
    RegionSampler(const Rect& region, std::size_t samples, std::uint64_t seed) : region_(region) {
        const std::size_t grid = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(std::max<std::size_t>(samples, 1)))));
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> jitter(0.0, 1.0);
        points_.reserve(grid * grid);
        const double cw = region.width() / static_cast<double>(grid);
        const double ch = region.height() / static_cast<double>(grid);
        for (std::size_t gy = 0; gy < grid; ++gy)
            for (std::size_t gx = 0; gx < grid; ++gx)
                points_.push_back({region.xmin + (static_cast<double>(gx) + jitter(rng)) * cw,
                                   region.ymin + (static_cast<double>(gy) + jitter(rng)) * ch});
    }

    const std::vector<Point>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double point_area() const { return region_.area() / static_cast<double>(points_.size()); }

private:
    Rect region_;
    std::vector<Point> points_;
};

inline constexpr std::size_t kDefaultMcSamples = 400000;

inline AreaDecomposition decompose_with_sampler(const ServerLayout& layout, const CoverageState& state,
                                                const RegionSampler& sampler) {
    layout.validate();
    const std::size_t m = layout.size();
    if (m > 63) throw std::invalid_argument("decompose: too many servers for subset masks");
    const auto radii = state.radii(layout);
    std::vector<double> r2(m);
    for (std::size_t i = 0; i < m; ++i) r2[i] = radii[i] * radii[i];

    std::map<std::uint64_t, std::size_t> counts;
    std::size_t covered = 0;
    for (const auto& p : sampler.points()) {
        std::uint64_t mask = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double dx = p.x - layout.positions[i].x, dy = p.y - layout.positions[i].y;
            if (dx * dx + dy * dy <= r2[i]) mask |= std::uint64_t{1} << i;
        }
        if (mask) { ++counts[mask]; ++covered; }
    }

    const double per_point_rate = sampler.point_area() * layout.areal_rate;
    AreaDecomposition d;
    d.exclusive_rates.assign(m, 0.0);
    for (const auto& [mask, count] : counts) {
        const double rate = static_cast<double>(count) * per_point_rate;
        if (std::popcount(mask) == 1) {
            d.exclusive_rates[static_cast<std::size_t>(std::countr_zero(mask))] = rate;
        } else {
            CommonRegion z;
            for (std::size_t i = 0; i < m; ++i)
                if (mask & (std::uint64_t{1} << i)) z.servers.push_back(static_cast<int>(i));
            z.rate = rate;
            d.common_regions.push_back(std::move(z));
        }
    }
    d.total_covered_rate = static_cast<double>(covered) * per_point_rate;
    return d;
}

inline AreaDecomposition decompose(const ServerLayout& layout, const CoverageState& state,
                                   GeometryMode mode, std::uint64_t seed,
                                   std::size_t samples = kDefaultMcSamples) {
    layout.validate();
    if (mode == GeometryMode::MonteCarlo)
        return decompose_with_sampler(layout, state, RegionSampler(layout.region, samples, seed));

    const std::size_t m = layout.size();
    const auto radii = state.radii(layout);
    detail::require_exact_supported(layout, radii);
    const auto exact = detail::exact_subset_areas(layout, radii);

    AreaDecomposition d;
    d.exclusive_rates.assign(m, 0.0);
    double covered = 0.0;
    for (std::size_t mask = 1; mask < exact.size(); ++mask) {
        const double area = exact[mask];
        covered += area;
        const double rate = area * layout.areal_rate;
        if (std::popcount(mask) == 1) {
            d.exclusive_rates[static_cast<std::size_t>(std::countr_zero(mask))] = rate;
        } else if (rate > 1e-14 * (1.0 + layout.total_arrival_rate())) {
            CommonRegion z;
            for (std::size_t i = 0; i < m; ++i)
                if (mask & (std::size_t{1} << i)) z.servers.push_back(static_cast<int>(i));
            z.rate = rate;
            d.common_regions.push_back(std::move(z));
        }
    }
    d.total_covered_rate = covered * layout.areal_rate;
    return d;
}

inline double union_area(const ServerLayout& layout, const CoverageState& state, GeometryMode mode,
                         std::uint64_t seed, std::size_t samples = kDefaultMcSamples) {
    layout.validate();
    const auto radii = state.radii(layout);
    if (mode == GeometryMode::Exact) {
        detail::require_exact_supported(layout, radii);
        const auto exact = detail::exact_subset_areas(layout, radii);
        double covered = 0.0;
        for (std::size_t mask = 1; mask < exact.size(); ++mask) covered += exact[mask];
        return covered;
    }
    const RegionSampler sampler(layout.region, samples, seed);
    std::vector<double> r2(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) r2[i] = radii[i] * radii[i];
    std::size_t covered = 0;
    for (const auto& p : sampler.points()) {
        for (std::size_t i = 0; i < layout.size(); ++i) {
            const double dx = p.x - layout.positions[i].x, dy = p.y - layout.positions[i].y;
            if (dx * dx + dy * dy <= r2[i]) { ++covered; break; }
        }
    }
    return static_cast<double>(covered) * sampler.point_area();
}

} // namespace cdn::geometry
