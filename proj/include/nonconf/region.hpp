#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "nonconf/error.hpp"
#include "nonconf/linear.hpp"

namespace nonconf {

struct BoundingBox {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double diagonal() const { return std::hypot(width(), height()); }
    Complex center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
};

/// Annulus centred at the origin.
struct Annulus {
    double r_min = 0.75;
    double r_max = 4.0 / 3.0;
};

struct Disk {
    Complex center{};
    double radius = 1.0;
};

struct Rectangle {
    double x_min = 0.0, y_min = 0.0, x_max = 1.0, y_max = 1.0;
};

struct RectangleUnion {
    std::vector<Rectangle> rects;
};

/// The working domain W: a closed, bounded planar set with a simple shape.
class Region {
public:
    using Shape = std::variant<Annulus, Disk, RectangleUnion>;

    explicit Region(Shape shape) : shape_(std::move(shape)) { validate(); }

    static Region annulus(double r_min, double r_max) { return Region(Annulus{r_min, r_max}); }
    static Region disk(Complex center, double radius) { return Region(Disk{center, radius}); }
    static Region rectangle(double x0, double y0, double x1, double y1) {
        return Region(RectangleUnion{{Rectangle{x0, y0, x1, y1}}});
    }
    static Region unit_square() { return rectangle(0.0, 0.0, 1.0, 1.0); }

    const Shape& shape() const { return shape_; }
    bool is_annulus() const { return std::holds_alternative<Annulus>(shape_); }

    bool contains(Complex z, double tol = 1e-12) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    const double r = std::abs(z);
                    return r >= s.r_min - tol && r <= s.r_max + tol;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return std::abs(z - s.center) <= s.radius + tol;
                } else {
                    return std::any_of(s.rects.begin(), s.rects.end(), [&](const Rectangle& r) {
                        return z.real() >= r.x_min - tol && z.real() <= r.x_max + tol &&
                               z.imag() >= r.y_min - tol && z.imag() <= r.y_max + tol;
                    });
                }
            },
            shape_);
    }

    /// True if the closed disk B(z, r) lies inside the region.
    bool contains_ball(Complex z, double r) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    const double m = std::abs(z);
                    return m - r >= s.r_min && m + r <= s.r_max;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return std::abs(z - s.center) + r <= s.radius;
                } else {
                    return std::any_of(s.rects.begin(), s.rects.end(), [&](const Rectangle& q) {
                        return z.real() - r >= q.x_min && z.real() + r <= q.x_max &&
                               z.imag() - r >= q.y_min && z.imag() + r <= q.y_max;
                    });
                }
            },
            shape_);
    }

    BoundingBox bounding_box() const {
        return std::visit(
            [](const auto& s) -> BoundingBox {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    return {-s.r_max, -s.r_max, s.r_max, s.r_max};
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return {s.center.real() - s.radius, s.center.imag() - s.radius,
                            s.center.real() + s.radius, s.center.imag() + s.radius};
                } else {
                    BoundingBox box{s.rects[0].x_min, s.rects[0].y_min, s.rects[0].x_max, s.rects[0].y_max};
                    for (const auto& r : s.rects) {
                        box.x_min = std::min(box.x_min, r.x_min);
                        box.y_min = std::min(box.y_min, r.y_min);
                        box.x_max = std::max(box.x_max, r.x_max);
                        box.y_max = std::max(box.y_max, r.y_max);
                    }
                    return box;
                }
            },
            shape_);
    }

    double diameter() const {
        return std::visit(
            [](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    return 2.0 * s.r_max;
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return 2.0 * s.radius;
                } else {
                    std::vector<Complex> corners;
                    for (const auto& r : s.rects) {
                        corners.insert(corners.end(), {Complex(r.x_min, r.y_min), Complex(r.x_max, r.y_min),
                                                       Complex(r.x_min, r.y_max), Complex(r.x_max, r.y_max)});
                    }
                    double d = 0.0;
                    for (std::size_t i = 0; i < corners.size(); ++i)
                        for (std::size_t j = i + 1; j < corners.size(); ++j)
                            d = std::max(d, std::abs(corners[i] - corners[j]));
                    return d;
                }
            },
            shape_);
    }

    /// Radius of the largest disk that fits inside the region.
    double inradius() const {
        return std::visit(
            [](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    return 0.5 * (s.r_max - s.r_min);
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return s.radius;
                } else {
                    double r = 0.0;
                    for (const auto& q : s.rects)
                        r = std::max(r, 0.5 * std::min(q.x_max - q.x_min, q.y_max - q.y_min));
                    return r;
                }
            },
            shape_);
    }

    /// A representative interior point used as the default base point.
    Complex anchor() const {
        return std::visit(
            [](const auto& s) -> Complex {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    return {0.0, 0.5 * (s.r_min + s.r_max)};
                } else if constexpr (std::is_same_v<T, Disk>) {
                    return s.center;
                } else {
                    const auto& r = s.rects[0];
                    return {0.5 * (r.x_min + r.x_max), 0.5 * (r.y_min + r.y_max)};
                }
            },
            shape_);
    }

    /// Roughly `count` points on the boundary, in a fixed order.
    std::vector<Complex> boundary_samples(int count) const {
        std::vector<Complex> out;
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                constexpr double two_pi = 2.0 * std::numbers::pi;
                if constexpr (std::is_same_v<T, Annulus>) {
                    const int half = std::max(count / 2, 4);
                    for (double radius : {s.r_min, s.r_max})
                        for (int k = 0; k < half; ++k)
                            out.push_back(std::polar(radius, two_pi * k / half));
                } else if constexpr (std::is_same_v<T, Disk>) {
                    for (int k = 0; k < count; ++k)
                        out.push_back(s.center + std::polar(s.radius, two_pi * k / count));
                } else {
                    const int per = std::max(count / static_cast<int>(s.rects.size()) / 4, 2);
                    for (const auto& r : s.rects) {
                        const Complex c[4] = {{r.x_min, r.y_min}, {r.x_max, r.y_min}, {r.x_max, r.y_max}, {r.x_min, r.y_max}};
                        for (int e = 0; e < 4; ++e)
                            for (int k = 0; k < per; ++k)
                                out.push_back(c[e] + (c[(e + 1) % 4] - c[e]) * (static_cast<double>(k) / per));
                    }
                }
            },
            shape_);
        return out;
    }

    /// Grid over the bounding box with spacing diameter/density, restricted to the region.
    /// The grid at density 2d contains the grid at density d.
    std::vector<Complex> grid(int density) const {
        const BoundingBox box = bounding_box();
        const double h = diameter() / density;
        std::vector<Complex> out;
        const int nx = static_cast<int>(std::floor(box.width() / h + 1e-9));
        const int ny = static_cast<int>(std::floor(box.height() / h + 1e-9));
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                const Complex z(box.x_min + i * h, box.y_min + j * h);
                if (contains(z, 0.0)) out.push_back(z);
            }
        return out;
    }

private:
    void validate() const {
        std::visit(
            [](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    if (!(s.r_min > 0.0 && s.r_max > s.r_min && std::isfinite(s.r_max)))
                        throw Error(ErrorKind::InvalidParameter, "annulus needs 0 < r_min < r_max");
                } else if constexpr (std::is_same_v<T, Disk>) {
                    if (!(s.radius > 0.0 && std::isfinite(s.radius)))
                        throw Error(ErrorKind::InvalidParameter, "disk radius must be positive");
                } else {
                    if (s.rects.empty()) throw Error(ErrorKind::InvalidParameter, "empty rectangle union");
                    for (const auto& r : s.rects)
                        if (!(r.x_max > r.x_min && r.y_max > r.y_min))
                            throw Error(ErrorKind::InvalidParameter, "degenerate rectangle");
                }
            },
            shape_);
    }

    Shape shape_;
};

} // namespace nonconf
