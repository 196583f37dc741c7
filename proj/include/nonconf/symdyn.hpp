#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nonconf/error.hpp"
#include "nonconf/linear.hpp"
#include "nonconf/maps.hpp"
#include "nonconf/transition.hpp"

namespace nonconf {

/// g_w(z) = g_{i_0} ∘ ... ∘ g_{i_{p-1}}(z), applied innermost first.
inline Complex apply_word(const InverseBranches& g, const Word& w, Complex z) {
    for (std::size_t k = w.size(); k-- > 0;) z = g.eval(w[k], z);
    return z;
}

struct ImageWithDerivative {
    Complex point;
    WirtingerDerivative derivative; ///< D(g_w)(z)
};

/// g_w(z) together with D(g_w)(z) by the chain rule.
inline ImageWithDerivative apply_word_with_derivative(const InverseBranches& g, const Word& w, Complex z) {
    WirtingerDerivative d{1.0, 0.0};
    for (std::size_t k = w.size(); k-- > 0;) {
        const Complex next = g.eval(w[k], z);
        d = compose(g.derivative_at_image(w[k], next), d);
        z = next;
    }
    return {z, d};
}

inline PlanarPoint project(const SemigroupSystem& system, const Word& w, PlanarPoint base) {
    if (!system.transition().admissible(w)) throw Error(ErrorKind::InvalidParameter, "word " + w.str() + " is not admissible");
    return PlanarPoint(apply_word(system.branches(), w, base.as_complex()));
}

/// The orbit x_0, ..., x_{p-1} of a periodic word: x_k = g_{i_k}(x_{k+1}),
/// indices mod p, so x_0 = pi(w w w ...).
struct PeriodicOrbit {
    std::vector<Complex> points;
    double residual = 0.0;
};

namespace detail {

inline constexpr int kMaxFixedPointIterations = 4000;

/// Newton on f_{i_{p-1}} ∘ ... ∘ f_{i_0}(z) - z = 0.
inline std::optional<Complex> polish_periodic_point(const InverseBranches& g, const Word& w, Complex z) {
    for (int it = 0; it < 60; ++it) {
        Complex y = z;
        WirtingerDerivative d{1.0, 0.0};
        for (std::size_t k = 0; k < w.size(); ++k) {
            d = compose(g.forward_derivative(w[k], y), d);
            y = g.forward(w[k], y);
        }
        d.d_z -= 1.0;
        const Complex step = solve_linear(d, -(y - z));
        z += step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) return z;
    }
    return std::nullopt;
}

} // namespace detail

/// Fixed point of g_w by iteration from the system base point. Each sweep
/// records the intermediate images, which are the orbit points once the
/// sweep has converged. If the iteration stalls (a cut near a spiralling
/// fixed point), the best iterate is refined by Newton on the forward
/// composition and the orbit is obtained by forward images.
inline PeriodicOrbit periodic_orbit(const SemigroupSystem& system, const PeriodicWord& pw) {
    if (!system.transition().cyclically_admissible(pw))
        throw Error(ErrorKind::InvalidParameter, "word " + pw.word.str() + " is not cyclically admissible");
    const InverseBranches& g = system.branches();
    const Word& w = pw.word;
    const std::size_t p = w.size();
    std::vector<Complex> sweep(p);
    Complex z = system.base_point();
    Complex best = z;
    double best_step = 1e300;
    for (int it = 0; it < detail::kMaxFixedPointIterations; ++it) {
        Complex y = z;
        for (std::size_t k = p; k-- > 0;) {
            y = g.eval(w[k], y);
            sweep[k] = y;
        }
        const double step = std::abs(y - z);
        if (step < best_step) {
            best_step = step;
            best = y;
        }
        z = y;
        if (step <= 1e-12 * std::max(1.0, std::abs(z))) return {sweep, step};
    }
    const auto polished = detail::polish_periodic_point(g, w, best);
    if (!polished)
        throw Error(ErrorKind::NoConvergence, "periodic point of " + w.str() + " did not converge");
    std::vector<Complex> orbit(p);
    Complex y = *polished;
    for (std::size_t k = 0; k < p; ++k) {
        orbit[k] = y;
        y = g.forward(w[k], y);
    }
    const double residual = std::abs(y - orbit[0]);
    if (residual > 1e-9 * std::max(1.0, std::abs(y)))
        throw Error(ErrorKind::NoConvergence, "periodic point of " + w.str() + " did not converge");
    return {orbit, residual};
}

inline PlanarPoint periodic_point(const SemigroupSystem& system, const PeriodicWord& w) {
    return PlanarPoint(periodic_orbit(system, w).points.front());
}

struct CylinderEstimate {
    Word word;
    double sampled_diameter = 0.0;
    double upper_product = 0.0; ///< prod l_{i_k}(z_k) * diam(W) * C
    double lower_product = 0.0; ///< prod s_{i_k}(z_k) * inradius(W) / C
};

/// Diameter of g_w(W) from the images of sampled boundary points, with the
/// chain-rule product bounds along the orbit of the base point.
inline CylinderEstimate cylinder_diameter(const SemigroupSystem& system, const Word& w, int boundary_samples,
                                          double distortion_constant = 1.0) {
    if (boundary_samples < 64) throw Error(ErrorKind::InvalidParameter, "boundary_samples must be >= 64");
    if (!system.transition().admissible(w)) throw Error(ErrorKind::InvalidParameter, "word " + w.str() + " is not admissible");
    const InverseBranches& g = system.branches();
    const auto boundary = system.region().boundary_samples(boundary_samples);
    std::vector<Complex> image;
    image.reserve(boundary.size());
    for (const Complex b : boundary) image.push_back(apply_word(g, w, b));
    double diam = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i)
        for (std::size_t j = i + 1; j < image.size(); ++j) diam = std::max(diam, std::abs(image[i] - image[j]));

    double l_prod = 1.0, s_prod = 1.0;
    Complex z = system.base_point();
    for (std::size_t k = w.size(); k-- > 0;) {
        const Complex next = g.eval(w[k], z);
        const SingularData sd = singular_data(g.derivative_at_image(w[k], next));
        l_prod *= sd.l;
        s_prod *= sd.s;
        z = next;
    }
    return {w, diam, l_prod * system.region().diameter() * distortion_constant,
            s_prod * system.region().inradius() / distortion_constant};
}

} // namespace nonconf
