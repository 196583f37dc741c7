#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "nonconf/error.hpp"
#include "nonconf/linear.hpp"
#include "nonconf/maps.hpp"
#include "nonconf/numerics.hpp"
#include "nonconf/symdyn.hpp"
#include "nonconf/transition.hpp"

namespace nonconf {

enum class CloudProvenance { CylinderCenters, CirclePreimages };

struct PointCloud {
    std::vector<PlanarPoint> points;
    CloudProvenance provenance = CloudProvenance::CylinderCenters;
    int depth = 0;
    double radius = 0.0; ///< starting circle radius for CirclePreimages
    int seeds = 0;       ///< points on the starting circle for CirclePreimages
};

/// One point g_w(base) per admissible word of length `depth`, lexicographic.
inline PointCloud limit_set_cloud(const SemigroupSystem& system, int depth, std::optional<PlanarPoint> base = {},
                                  std::uint64_t budget = kDefaultWordBudget) {
    if (depth < 0) throw Error(ErrorKind::InvalidParameter, "depth must be >= 0");
    const PlanarPoint start = base ? *base : PlanarPoint(system.region().anchor());
    PointCloud cloud;
    cloud.depth = depth;
    if (depth == 0) {
        cloud.points.push_back(start);
        return cloud;
    }
    const auto words = admissible_words(system.transition(), depth, budget);
    cloud.points.reserve(words.size());
    for (const Word& w : words) cloud.points.emplace_back(apply_word(system.branches(), w, start.as_complex()));
    return cloud;
}

inline constexpr std::uint64_t kPreimagePointCap = std::uint64_t{1} << 22;

/// All depth-fold inverse images of `seeds` equispaced points on |z| = R.
/// When n^depth * seeds exceeds `cap`, the seed count is reduced first.
inline PointCloud julia_preimage_cloud(const GeneratorFamily& family, double R, int depth, int seeds = 256,
                                       std::uint64_t cap = kPreimagePointCap) {
    if (depth < 1) throw Error(ErrorKind::InvalidParameter, "depth must be >= 1");
    if (!(R > 0.0)) throw Error(ErrorKind::InvalidParameter, "radius must be positive");
    const InverseBranches g(family);
    const auto n = static_cast<std::uint64_t>(g.count());
    std::uint64_t per_seed = 1;
    for (int k = 0; k < depth; ++k) {
        per_seed *= n;
        if (per_seed > cap) throw Error(ErrorKind::BudgetExceeded, "n^depth exceeds the point cap");
    }
    const auto m = static_cast<int>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(seeds, 1)), cap / per_seed)));
    std::vector<Complex> level(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) level[j] = std::polar(R, 2.0 * std::numbers::pi * (j + 0.5) / m);
    for (int k = 0; k < depth; ++k) {
        std::vector<Complex> next;
        next.reserve(level.size() * n);
        for (const Complex w : level)
            for (int i = 0; i < g.count(); ++i) next.push_back(g.eval(i, w));
        level.swap(next);
    }
    PointCloud cloud;
    cloud.provenance = CloudProvenance::CirclePreimages;
    cloud.depth = depth;
    cloud.radius = R;
    cloud.seeds = m;
    cloud.points.reserve(level.size());
    for (const Complex z : level) cloud.points.emplace_back(z);
    return cloud;
}

struct BoxCountReport {
    std::vector<double> scales;       ///< eps_k = 2^-k * extent
    std::vector<std::uint64_t> counts; ///< N(eps_k)
    double slope = 0.0;
    double r2 = 0.0;
    int k_first = 0; ///< fitted range
    int k_last = 0;
};

inline BoundingBox cloud_bounds(const PointCloud& cloud) {
    BoundingBox box{1e300, 1e300, -1e300, -1e300};
    for (const auto& p : cloud.points) {
        box.x_min = std::min(box.x_min, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.x_max = std::max(box.x_max, p.x);
        box.y_max = std::max(box.y_max, p.y);
    }
    return box;
}

/// Box-counting slope on a dyadic grid anchored at the cloud bounding box.
/// The two coarsest scales of [k_min, k_max] are dropped, as are trailing
/// scales where N grows by less than 1.2 per halving (saturation).
inline BoxCountReport box_dimension(const PointCloud& cloud, int k_min, int k_max) {
    if (cloud.points.size() < 1000) throw Error(ErrorKind::InvalidParameter, "box counting needs >= 1000 points");
    if (k_min < 0 || k_max > 30 || k_max < k_min) throw Error(ErrorKind::InvalidParameter, "bad scale range");
    const BoundingBox box = cloud_bounds(cloud);
    const double extent = std::max(box.width(), box.height());
    if (!(extent > 0.0)) throw Error(ErrorKind::DegenerateFit, "cloud has zero extent");

    BoxCountReport report;
    std::vector<std::uint64_t> keys(cloud.points.size());
    for (int k = k_min; k <= k_max; ++k) {
        const std::uint64_t cells = std::uint64_t{1} << k;
        const double eps = extent / static_cast<double>(cells);
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const auto ix = std::min<std::uint64_t>(cells - 1, static_cast<std::uint64_t>((cloud.points[i].x - box.x_min) / eps));
            const auto iy = std::min<std::uint64_t>(cells - 1, static_cast<std::uint64_t>((cloud.points[i].y - box.y_min) / eps));
            keys[i] = (ix << 32) | iy;
        }
        std::sort(keys.begin(), keys.end());
        report.scales.push_back(eps);
        report.counts.push_back(static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin()));
    }
    std::size_t first = std::min<std::size_t>(2, report.counts.size());
    std::size_t last = report.counts.size();
    while (last > first + 1 &&
           static_cast<double>(report.counts[last - 1]) < 1.2 * static_cast<double>(report.counts[last - 2]))
        --last;
    if (last - first < 3) throw Error(ErrorKind::DegenerateFit, "fewer than 3 usable scales");
    std::vector<double> x, y;
    for (std::size_t i = first; i < last; ++i) {
        x.push_back(std::log(1.0 / report.scales[i]));
        y.push_back(std::log(static_cast<double>(report.counts[i])));
    }
    const LinearFit fit = least_squares(x, y);
    report.slope = fit.slope;
    report.r2 = fit.r2;
    report.k_first = k_min + static_cast<int>(first);
    report.k_last = k_min + static_cast<int>(last) - 1;
    return report;
}

struct RasterImage {
    int width = 0;
    int height = 0;
    BoundingBox bounds;
    std::vector<std::uint8_t> pixels; ///< row-major, row 0 at the top

    std::uint8_t at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
    std::size_t lit() const { return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), std::uint8_t{255})); }
};

/// Binary hit image: 255 where some point lands, 0 elsewhere.
inline RasterImage rasterize(const PointCloud& cloud, int width, int height, const BoundingBox& bounds) {
    if (width < 1 || height < 1) throw Error(ErrorKind::InvalidParameter, "image size must be positive");
    if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) throw Error(ErrorKind::InvalidParameter, "degenerate bounds");
    RasterImage img{width, height, bounds, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
    for (const auto& p : cloud.points) {
        const double u = (p.x - bounds.x_min) / bounds.width();
        const double v = (bounds.y_max - p.y) / bounds.height();
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
        const int col = std::min(width - 1, static_cast<int>(u * width));
        const int row = std::min(height - 1, static_cast<int>(v * height));
        img.pixels[static_cast<std::size_t>(row) * width + col] = 255;
    }
    return img;
}

/// Connected components of pixels equal to `value` (4- or 8-connectivity).
inline int count_components(const RasterImage& img, std::uint8_t value, int connectivity) {
    if (connectivity != 4 && connectivity != 8) throw Error(ErrorKind::InvalidParameter, "connectivity must be 4 or 8");
    std::vector<std::uint8_t> seen(img.pixels.size(), 0);
    const int dx[] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dy[] = {0, 0, 1, -1, 1, -1, 1, -1};
    int components = 0;
    std::deque<std::pair<int, int>> queue;
    for (int row = 0; row < img.height; ++row) {
        for (int col = 0; col < img.width; ++col) {
            const auto idx = static_cast<std::size_t>(row) * img.width + col;
            if (seen[idx] || img.pixels[idx] != value) continue;
            ++components;
            seen[idx] = 1;
            queue.emplace_back(col, row);
            while (!queue.empty()) {
                const auto [c, r] = queue.front();
                queue.pop_front();
                for (int d = 0; d < connectivity; ++d) {
                    const int nc = c + dx[d], nr = r + dy[d];
                    if (nc < 0 || nr < 0 || nc >= img.width || nr >= img.height) continue;
                    const auto nidx = static_cast<std::size_t>(nr) * img.width + nc;
                    if (seen[nidx] || img.pixels[nidx] != value) continue;
                    seen[nidx] = 1;
                    queue.emplace_back(nc, nr);
                }
            }
        }
    }
    return components;
}

/// Binary PGM (P5, maxval 255).
inline void write_pgm(std::ostream& out, const RasterImage& img) {
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

/// 17 significant digits, '.' separator, independent of the global locale.
inline std::string format_real(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// CSV with header `x,y`, one point per line, LF endings.
inline void write_csv(std::ostream& out, const PointCloud& cloud) {
    out << "x,y\n";
    for (const auto& p : cloud.points) out << format_real(p.x) << ',' << format_real(p.y) << '\n';
}

} // namespace nonconf
