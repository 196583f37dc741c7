#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nonconf/error.hpp"
#include "nonconf/linear.hpp"
#include "nonconf/region.hpp"
#include "nonconf/transition.hpp"

namespace nonconf {

// ---------------------------------------------------------------------------
// Generator families
// ---------------------------------------------------------------------------

/// Contraction g(z) = a z + b conj(z) + t, given directly as the inverse branch.
struct AffineBranch {
    Complex a{};
    Complex b{};
    Complex t{};
};

struct AffineFamily {
    std::vector<AffineBranch> branches;
};

/// f(z) = z^2 + b conj(z) + c.
struct QuadConjugateFamily {
    Complex b{};
    Complex c{};
};

/// f(z) = z^n |z|^(gamma - n) + c.
struct PowerModulusFamily {
    int n = 2;
    double gamma = 2.0;
    Complex c{};
};

using GeneratorFamily = std::variant<AffineFamily, QuadConjugateFamily, PowerModulusFamily>;

enum class FamilyKind { Affine, QuadConjugate, PowerModulus };

inline FamilyKind kind_of(const GeneratorFamily& family) {
    return static_cast<FamilyKind>(family.index());
}

inline int branch_count(const GeneratorFamily& family) {
    return std::visit(
        [](const auto& f) -> int {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, AffineFamily>) return static_cast<int>(f.branches.size());
            else if constexpr (std::is_same_v<T, QuadConjugateFamily>) return 2;
            else return f.n;
        },
        family);
}

namespace detail {

inline void require_branch(const GeneratorFamily& family, int branch) {
    if (branch < 0 || branch >= branch_count(family))
        throw Error(ErrorKind::InvalidParameter, "branch index " + std::to_string(branch) + " out of range");
}

inline WirtingerDerivative affine_forward_derivative(const AffineBranch& g) {
    const double det = std::norm(g.a) - std::norm(g.b);
    if (std::abs(det) <= kDegenerateTolerance) throw Error(ErrorKind::DegenerateDerivative, "singular affine branch");
    return {std::conj(g.a) / det, -g.b / det};
}

inline double wrap_two_pi(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    angle = std::fmod(angle, two_pi);
    if (angle < 0.0) angle += two_pi;
    if (angle >= two_pi) angle = 0.0;
    return angle;
}

} // namespace detail

/// Forward map f_branch(z). For the Julia families every branch shares one f.
inline Complex forward_eval(const GeneratorFamily& family, int branch, Complex z) {
    detail::require_branch(family, branch);
    return std::visit(
        [&](const auto& f) -> Complex {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, AffineFamily>) {
                const auto& g = f.branches[static_cast<std::size_t>(branch)];
                return solve_linear({g.a, g.b}, z - g.t);
            } else if constexpr (std::is_same_v<T, QuadConjugateFamily>) {
                return z * z + f.b * std::conj(z) + f.c;
            } else {
                const double r = std::abs(z);
                if (r == 0.0) throw Error(ErrorKind::OriginSingularity, "power-modulus map at z = 0");
                return std::pow(z, f.n) * std::pow(r, f.gamma - f.n) + f.c;
            }
        },
        family);
}

/// Wirtinger derivative (f_z, f_zbar) of the forward map.
inline WirtingerDerivative forward_derivative(const GeneratorFamily& family, Complex z, int branch = 0) {
    detail::require_branch(family, branch);
    return std::visit(
        [&](const auto& f) -> WirtingerDerivative {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, AffineFamily>) {
                return detail::affine_forward_derivative(f.branches[static_cast<std::size_t>(branch)]);
            } else if constexpr (std::is_same_v<T, QuadConjugateFamily>) {
                return {2.0 * z, f.b};
            } else {
                const double r = std::abs(z);
                if (r == 0.0) throw Error(ErrorKind::OriginSingularity, "power-modulus derivative at z = 0");
                const double n = f.n;
                const Complex fz = std::pow(z, f.n - 1) * std::pow(r, f.gamma - n) * (0.5 * (n + f.gamma));
                const Complex fzbar = std::pow(z, f.n + 1) * std::pow(r, f.gamma - n - 2.0) * (0.5 * (f.gamma - n));
                return {fz, fzbar};
            }
        },
        family);
}

inline void validate_family(const GeneratorFamily& family) {
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, AffineFamily>) {
                if (f.branches.empty()) throw Error(ErrorKind::InvalidParameter, "affine family needs branches");
                for (const auto& g : f.branches) detail::affine_forward_derivative(g);
            } else if constexpr (std::is_same_v<T, QuadConjugateFamily>) {
                if (!std::isfinite(std::abs(f.b)) || !std::isfinite(std::abs(f.c)))
                    throw Error(ErrorKind::InvalidParameter, "non-finite quadratic parameters");
            } else {
                if (f.n < 2) throw Error(ErrorKind::InvalidParameter, "power-modulus degree n must be >= 2");
                if (!(f.gamma > 0.0) || !std::isfinite(f.gamma))
                    throw Error(ErrorKind::InvalidParameter, "power-modulus gamma must be > 0");
            }
        },
        family);
}

// ---------------------------------------------------------------------------
// Inverse branches
// ---------------------------------------------------------------------------

/// The contracting inverse branches g_0, ..., g_{n-1} of a family.
///
/// For the circle-type families branch k lands in the k-th of n sectors of
/// angular width 2pi/n, measured from the fixed point beta of f that
/// continues z = 1. The sector cut therefore passes through beta, so the
/// coding agrees with binary/n-ary angle expansions at the unperturbed
/// parameters. The quadratic family has no closed-form inverse: Newton on
/// R^2 is seeded with the b = 0 root of the same sector.
class InverseBranches {
public:
    explicit InverseBranches(GeneratorFamily family) : family_(std::move(family)) {
        validate_family(family_);
        if (kind_of(family_) != FamilyKind::Affine) locate_reference_fixed_point();
    }

    const GeneratorFamily& family() const { return family_; }
    int count() const { return branch_count(family_); }
    /// Fixed point of f near 1 (circle-type families only).
    Complex reference_fixed_point() const { return beta_; }

    Complex forward(int branch, Complex z) const { return forward_eval(family_, branch, z); }
    WirtingerDerivative forward_derivative(int branch, Complex z) const {
        return nonconf::forward_derivative(family_, z, branch);
    }

    Complex eval(int branch, Complex w) const {
        detail::require_branch(family_, branch);
        return std::visit(
            [&](const auto& f) -> Complex {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, AffineFamily>) {
                    const auto& g = f.branches[static_cast<std::size_t>(branch)];
                    return g.a * w + g.b * std::conj(w) + g.t;
                } else if constexpr (std::is_same_v<T, QuadConjugateFamily>) {
                    return newton_quadratic(f, w, sector_seed(w, f.c, 2, 2.0, branch));
                } else {
                    return sector_seed(w, f.c, f.n, f.gamma, branch);
                }
            },
            family_);
    }

    /// D(g_branch)(w).
    WirtingerDerivative derivative(int branch, Complex w) const {
        if (const auto* aff = std::get_if<AffineFamily>(&family_)) {
            detail::require_branch(family_, branch);
            const auto& g = aff->branches[static_cast<std::size_t>(branch)];
            return {g.a, g.b};
        }
        return invert_linear(forward_derivative(branch, eval(branch, w)));
    }

    /// D(g_branch) at w given the already computed image z = g_branch(w).
    WirtingerDerivative derivative_at_image(int branch, Complex z) const {
        if (const auto* aff = std::get_if<AffineFamily>(&family_)) {
            const auto& g = aff->branches[static_cast<std::size_t>(branch)];
            return {g.a, g.b};
        }
        return invert_linear(forward_derivative(branch, z));
    }

private:
    /// Closed-form inverse of z -> z^n |z|^(gamma-n) in sector `branch`.
    /// For the quadratic family (n = gamma = 2) this is the b = 0 seed.
    Complex sector_seed(Complex w, Complex c, int n, double gamma, int branch) const {
        const Complex u = w - c;
        const double modulus = std::abs(u);
        if (modulus == 0.0) throw Error(ErrorKind::OriginSingularity, "preimage of c is the origin");
        const double psi = detail::wrap_two_pi(std::arg(u) - cut_arg_);
        const double angle = theta0_ + (psi + 2.0 * std::numbers::pi * branch) / n;
        return std::polar(std::pow(modulus, 1.0 / gamma), angle);
    }

    static Complex newton_quadratic(const QuadConjugateFamily& f, Complex w, Complex z) {
        constexpr int kMaxIterations = 50;
        constexpr double kStepTolerance = 1e-13;
        for (int it = 0; it < kMaxIterations; ++it) {
            const Complex residual = z * z + f.b * std::conj(z) + f.c - w;
            Complex step;
            try {
                step = solve_linear({2.0 * z, f.b}, -residual);
            } catch (const Error&) {
                throw Error(ErrorKind::NewtonDivergence, "singular Jacobian in quadratic inverse");
            }
            z += step;
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
            if (std::abs(step) <= kStepTolerance * std::max(1.0, std::abs(z))) {
                const Complex r = z * z + f.b * std::conj(z) + f.c - w;
                if (std::abs(r) <= 1e-12 * std::max(1.0, std::abs(w))) return z;
            }
        }
        std::ostringstream msg;
        msg << "Newton did not converge for w = " << w << " (|b| too large for the region?)";
        throw Error(ErrorKind::NewtonDivergence, msg.str());
    }

    void locate_reference_fixed_point() {
        Complex z{1.0, 0.0};
        if (const auto* q = std::get_if<QuadConjugateFamily>(&family_))
            z = 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * q->c));
        bool converged = false;
        for (int it = 0; it < 100 && !converged; ++it) {
            const Complex g = forward(0, z) - z;
            WirtingerDerivative d = forward_derivative(0, z);
            d.d_z -= 1.0;
            const Complex step = solve_linear(d, -g);
            z += step;
            converged = std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z));
        }
        if (!converged || std::abs(forward(0, z) - z) > 1e-12)
            throw Error(ErrorKind::InvalidParameter, "no fixed point of f near z = 1; parameters too large");
        beta_ = z;
        std::visit(
            [&](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (!std::is_same_v<T, AffineFamily>) {
                    int n = 2;
                    if constexpr (std::is_same_v<T, PowerModulusFamily>) n = f.n;
                    cut_arg_ = std::arg(beta_ - f.c);
                    // choose the n-th root of the cut direction that sits closest to beta
                    double best = 0.0, best_gap = 1e300;
                    for (int k = 0; k < n; ++k) {
                        const double cand = (cut_arg_ + 2.0 * std::numbers::pi * k) / n;
                        const double gap = std::abs(std::arg(std::polar(1.0, cand) * std::conj(beta_)));
                        if (gap < best_gap) {
                            best_gap = gap;
                            best = cand;
                        }
                    }
                    theta0_ = best;
                }
            },
            family_);
    }

    GeneratorFamily family_;
    Complex beta_{1.0, 0.0};
    double cut_arg_ = 0.0;
    double theta0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Semigroup system
// ---------------------------------------------------------------------------

struct SystemConfig {
    GeneratorFamily family;
    Region region = Region::annulus(0.75, 4.0 / 3.0);
    double alpha = 1.0;
    std::optional<TransitionMatrix> transition;
    std::optional<double> holder_constant;
};

class SemigroupSystem {
public:
    SemigroupSystem(InverseBranches branches, Region region, double alpha, TransitionMatrix transition, double holder)
        : branches_(std::move(branches)), region_(std::move(region)), alpha_(alpha),
          transition_(std::move(transition)), holder_constant_(holder) {}

    const InverseBranches& branches() const { return branches_; }
    const GeneratorFamily& family() const { return branches_.family(); }
    const Region& region() const { return region_; }
    double alpha() const { return alpha_; }
    const TransitionMatrix& transition() const { return transition_; }
    /// L0 with |R(w, z)| <= L0 |w - z|^(1 + alpha).
    double holder_constant() const { return holder_constant_; }
    int branch_count() const { return branches_.count(); }

    /// Default base point for projections and fixed-point iteration.
    Complex base_point() const {
        if (region_.is_annulus()) {
            const auto& a = std::get<Annulus>(region_.shape());
            const Complex beta = branches_.reference_fixed_point();
            return std::polar(0.5 * (a.r_min + a.r_max), std::arg(beta) + std::numbers::pi / branch_count());
        }
        return region_.anchor();
    }

private:
    InverseBranches branches_;
    Region region_;
    double alpha_;
    TransitionMatrix transition_;
    double holder_constant_;
};

/// Both points lie in one continuity chart of g: within a chart the branch
/// contracts, across a sector cut it jumps by O(1).
inline bool same_chart(Complex z, Complex w, Complex gz, Complex gw) {
    return std::abs(gw - gz) <= std::abs(w - z);
}

/// Max over sampled pairs of |R(w,z)| / |w-z|^(1+alpha), |w-z| in [1e-4, 1e-1], times `safety`.
inline double estimate_holder_constant(const InverseBranches& g, const Region& region, double alpha,
                                       double safety = 2.0, int density = 24) {
    double best = 0.0;
    const auto grid = region.grid(density);
    for (int branch = 0; branch < g.count(); ++branch) {
        for (const Complex z : grid) {
            const Complex gz = g.eval(branch, z);
            const WirtingerDerivative d = g.derivative_at_image(branch, gz);
            for (double step : {1e-4, 1e-3, 1e-2, 1e-1}) {
                for (int k = 0; k < 8; ++k) {
                    const Complex w = z + std::polar(step, 2.0 * std::numbers::pi * k / 8 + 0.1);
                    if (!region.contains(w, 0.0)) continue;
                    const Complex gw = g.eval(branch, w);
                    if (!same_chart(z, w, gz, gw)) continue;
                    const Complex remainder = gw - gz - d.apply(w - z);
                    best = std::max(best, std::abs(remainder) / std::pow(step, 1.0 + alpha));
                }
            }
        }
    }
    return safety * best;
}

inline SemigroupSystem build_system(const SystemConfig& config) {
    validate_family(config.family);
    if (!(config.alpha > 0.0 && config.alpha <= 1.0))
        throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1]");
    const Region& region = config.region;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadConjugateFamily>) {
                if (region.contains(0.0, 0.0))
                    throw Error(ErrorKind::InvalidParameter, "quadratic family needs a region excluding the origin");
                if (const auto* a = std::get_if<Annulus>(&region.shape()); a && std::abs(f.b) >= 2.0 * a->r_min)
                    throw Error(ErrorKind::InvalidParameter, "|b| must be below 2 r_min for an invertible derivative");
            } else if constexpr (std::is_same_v<T, PowerModulusFamily>) {
                if (region.contains(0.0, 0.0))
                    throw Error(ErrorKind::InvalidParameter, "power-modulus family needs a region excluding the origin");
            }
        },
        config.family);

    InverseBranches branches(config.family);
    const int n = branches.count();
    TransitionMatrix transition = config.transition ? *config.transition : TransitionMatrix::full_shift(n);
    if (transition.size() != n)
        throw Error(ErrorKind::InvalidParameter, "transition matrix size does not match branch count");

    std::vector<Complex> samples = region.boundary_samples(256);
    const auto interior = region.grid(16);
    samples.insert(samples.end(), interior.begin(), interior.end());

    for (int i = 0; i < n; ++i) {
        for (const Complex w : samples) {
            const SingularData sd = singular_data(branches.derivative(i, w));
            if (sd.l >= 1.0) {
                std::ostringstream msg;
                msg << "branch " << i << " has l = " << sd.l << " >= 1 at w = " << w;
                throw Error(ErrorKind::NotContracting, msg.str());
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (const Complex w : samples) {
            const Complex z = branches.eval(i, w);
            if (!region.contains(z, 1e-9)) {
                std::ostringstream msg;
                msg << "branch " << i << " maps " << w << " to " << z << " outside the region";
                throw Error(ErrorKind::RegionNotInvariant, msg.str());
            }
        }
    }
    if (kind_of(config.family) == FamilyKind::Affine) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                for (const Complex w : interior) {
                    const Complex p = branches.eval(i, w);
                    if (region.contains_ball(branches.forward(j, p), 1e-9)) {
                        std::ostringstream msg;
                        msg << "images of branches " << i << " and " << j << " overlap near " << p;
                        throw Error(ErrorKind::InvalidParameter, msg.str());
                    }
                }
            }
    }
    double holder = 0.0;
    if (config.holder_constant) holder = *config.holder_constant;
    else if (kind_of(config.family) != FamilyKind::Affine) holder = estimate_holder_constant(branches, region, config.alpha);
    return SemigroupSystem(std::move(branches), region, config.alpha, std::move(transition), holder);
}

/// Checked inverse branch evaluation.
inline PlanarPoint inverse_branch_eval(const SemigroupSystem& system, int branch, PlanarPoint w) {
    if (!w.finite() || !system.region().contains(w.as_complex(), 1e-9))
        throw Error(ErrorKind::OutsideRegion, "point outside the system region");
    return PlanarPoint(system.branches().eval(branch, w.as_complex()));
}

inline WirtingerDerivative inverse_branch_derivative(const SemigroupSystem& system, int branch, PlanarPoint w) {
    if (!w.finite() || !system.region().contains(w.as_complex(), 1e-9))
        throw Error(ErrorKind::OutsideRegion, "point outside the system region");
    return system.branches().derivative(branch, w.as_complex());
}

// ---------------------------------------------------------------------------
// Global bounds
// ---------------------------------------------------------------------------

struct SafetyFactors {
    double upper = 1.01; ///< applied to l_max and K_max
    double lower = 0.99; ///< applied to s_min
};

struct GlobalBounds {
    double l_max = 0.0;
    double s_min = 0.0;
    double K_max = 1.0;
    double beta = 0.0;
    bool regular = false;
    double margin = 0.0; ///< 1/l_max^alpha - K_max
    bool beta_below_alpha = false;
    int sample_density = 0;
};

/// Sup/inf of the singular data over a grid of the region. A safety factor is
/// only applied to a quantity that actually varies across the samples, so
/// constant derivative fields (affine maps, conformal K = 1) stay exact.
inline GlobalBounds global_bounds(const SemigroupSystem& system, int sample_density, SafetyFactors safety = {}) {
    if (sample_density < 16) throw Error(ErrorKind::InvalidParameter, "sample_density must be >= 16");
    std::vector<Complex> points = system.region().grid(sample_density);
    const auto boundary = system.region().boundary_samples(4 * sample_density);
    points.insert(points.end(), boundary.begin(), boundary.end());

    double l_hi = 0.0, l_lo = 1e300, s_lo = 1e300, s_hi = 0.0, k_hi = 0.0, k_lo = 1e300, beta = 0.0;
    for (int i = 0; i < system.branch_count(); ++i) {
        for (const Complex w : points) {
            const SingularData sd = singular_data(system.branches().derivative(i, w));
            if (sd.l >= 1.0) {
                std::ostringstream msg;
                msg << "branch " << i << " has l = " << sd.l << " >= 1 at w = " << w;
                throw Error(ErrorKind::NotContracting, msg.str());
            }
            l_hi = std::max(l_hi, sd.l);
            l_lo = std::min(l_lo, sd.l);
            s_lo = std::min(s_lo, sd.s);
            s_hi = std::max(s_hi, sd.s);
            k_hi = std::max(k_hi, sd.K);
            k_lo = std::min(k_lo, sd.K);
            beta = std::max(beta, std::log(sd.K) / std::log(1.0 / sd.l));
        }
    }
    const auto varies = [](double lo, double hi) { return hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); };
    GlobalBounds out;
    out.sample_density = sample_density;
    out.l_max = varies(l_lo, l_hi) ? l_hi * safety.upper : l_hi;
    out.s_min = varies(s_lo, s_hi) ? s_lo * safety.lower : s_lo;
    out.K_max = varies(k_lo, k_hi) ? k_hi * safety.upper : k_hi;
    out.beta = beta;
    out.margin = 1.0 / std::pow(out.l_max, system.alpha()) - out.K_max;
    out.regular = out.margin > 0.0;
    out.beta_below_alpha = beta < system.alpha();
    return out;
}

} // namespace nonconf
