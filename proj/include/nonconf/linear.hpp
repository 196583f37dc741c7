#pragma once

#include <cmath>
#include <complex>

#include "nonconf/error.hpp"

namespace nonconf {

using Complex = std::complex<double>;

/// A point z = x + iy of the plane.
struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;

    constexpr PlanarPoint() = default;
    constexpr PlanarPoint(double x_, double y_) : x(x_), y(y_) {}
    explicit PlanarPoint(Complex z) : x(z.real()), y(z.imag()) {}

    Complex as_complex() const { return {x, y}; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(PlanarPoint a, PlanarPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// The R-linear map v -> d_z * v + d_zbar * conj(v).
struct WirtingerDerivative {
    Complex d_z{};
    Complex d_zbar{};

    Complex apply(Complex v) const { return d_z * v + d_zbar * std::conj(v); }
    bool finite() const {
        return std::isfinite(d_z.real()) && std::isfinite(d_z.imag()) &&
               std::isfinite(d_zbar.real()) && std::isfinite(d_zbar.imag());
    }
};

/// outer ∘ inner as a single Wirtinger pair.
inline WirtingerDerivative compose(const WirtingerDerivative& outer, const WirtingerDerivative& inner) {
    return {outer.d_z * inner.d_z + outer.d_zbar * std::conj(inner.d_zbar),
            outer.d_z * inner.d_zbar + outer.d_zbar * std::conj(inner.d_z)};
}

inline WirtingerDerivative scale(const WirtingerDerivative& d, double factor) {
    return {d.d_z * factor, d.d_zbar * factor};
}

struct SingularData {
    double l = 0.0; ///< largest singular value
    double s = 0.0; ///< smallest singular value
    double K = 1.0; ///< dilatation l/s
};

inline constexpr double kDegenerateTolerance = 1e-14;

inline SingularData singular_data(const WirtingerDerivative& d) {
    if (!d.finite()) throw Error(ErrorKind::DegenerateDerivative, "non-finite derivative");
    const double a = std::abs(d.d_z);
    const double b = std::abs(d.d_zbar);
    const double l = a + b;
    const double s = std::abs(a - b);
    if (s <= kDegenerateTolerance * std::max(1.0, l))
        throw Error(ErrorKind::DegenerateDerivative, "|d_z| = |d_zbar|, map not locally invertible");
    return {l, s, l / s};
}

/// Inverse of an orientation-preserving R-linear map.
inline WirtingerDerivative invert_linear(const WirtingerDerivative& d) {
    const double det = std::norm(d.d_z) - std::norm(d.d_zbar);
    if (!d.finite() || det <= kDegenerateTolerance * std::max(1.0, std::norm(d.d_z)))
        throw Error(ErrorKind::DegenerateDerivative, "|d_z|^2 - |d_zbar|^2 not positive");
    return {std::conj(d.d_z) / det, -d.d_zbar / det};
}

/// Solve L(v) = rhs for v; L need not preserve orientation.
inline Complex solve_linear(const WirtingerDerivative& d, Complex rhs) {
    const double det = std::norm(d.d_z) - std::norm(d.d_zbar);
    if (!d.finite() || std::abs(det) <= kDegenerateTolerance * std::max(1.0, std::norm(d.d_z)))
        throw Error(ErrorKind::DegenerateDerivative, "singular linear system");
    return (std::conj(d.d_z) * rhs - d.d_zbar * std::conj(rhs)) / det;
}

/// Smallest angle in [0, pi] between two nonzero vectors.
inline double angle_between(Complex a, Complex b) {
    return std::abs(std::arg(a * std::conj(b)));
}

} // namespace nonconf
