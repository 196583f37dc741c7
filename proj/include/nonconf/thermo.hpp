#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nonconf/error.hpp"
#include "nonconf/maps.hpp"
#include "nonconf/numerics.hpp"
#include "nonconf/symdyn.hpp"
#include "nonconf/transition.hpp"

namespace nonconf {

enum class PotentialKind {
    Upper, ///< log l
    Lower, ///< log s
};

inline const char* to_string(PotentialKind kind) { return kind == PotentialKind::Upper ? "upper" : "lower"; }

namespace detail {

/// Potential of the k-th step of a periodic orbit: the singular value of
/// g_{i_k} at x_{k+1}, the point it is applied to. D(g_{i_k})(x_{k+1}) is
/// the inverse of D(f_{i_k})(x_k), so no branch choice is repeated here.
inline SingularData step_singular_data(const InverseBranches& g, const Word& w, const PeriodicOrbit& orbit,
                                       std::size_t k) {
    return singular_data(g.derivative_at_image(w[k], orbit.points[k]));
}

} // namespace detail

inline double potential_eval(const SemigroupSystem& system, PotentialKind kind, const PeriodicWord& w, std::size_t k) {
    if (k >= w.period()) throw Error(ErrorKind::InvalidParameter, "potential index out of range");
    const PeriodicOrbit orbit = periodic_orbit(system, w);
    const SingularData sd = detail::step_singular_data(system.branches(), w.word, orbit, k);
    return std::log(kind == PotentialKind::Upper ? sd.l : sd.s);
}

/// Birkhoff sums of both potentials over every periodic word of period p,
/// stored in lexicographic word order.
struct OrbitSums {
    int p = 0;
    std::vector<double> upper;
    std::vector<double> lower;
    double max_upper_potential = -std::numeric_limits<double>::infinity();
    double max_lower_potential = -std::numeric_limits<double>::infinity();

    const std::vector<double>& sums(PotentialKind kind) const { return kind == PotentialKind::Upper ? upper : lower; }
    double max_potential(PotentialKind kind) const {
        return kind == PotentialKind::Upper ? max_upper_potential : max_lower_potential;
    }
};

struct ComputeOptions {
    std::uint64_t budget = kDefaultWordBudget;
    int jobs = 1;
};

inline OrbitSums orbit_sums(const SemigroupSystem& system, int p, ComputeOptions options = {}) {
    const auto words = periodic_words(system.transition(), p, options.budget);
    OrbitSums out;
    out.p = p;
    out.upper.resize(words.size());
    out.lower.resize(words.size());
    std::vector<double> max_up(words.size()), max_lo(words.size());
    parallel_for(words.size(), options.jobs, [&](std::size_t i) {
        const PeriodicOrbit orbit = periodic_orbit(system, words[i]);
        double su = 0.0, sl = 0.0;
        double mu = -std::numeric_limits<double>::infinity(), ml = mu;
        for (std::size_t k = 0; k < static_cast<std::size_t>(p); ++k) {
            const SingularData sd = detail::step_singular_data(system.branches(), words[i].word, orbit, k);
            const double lu = std::log(sd.l), ll = std::log(sd.s);
            su += lu;
            sl += ll;
            mu = std::max(mu, lu);
            ml = std::max(ml, ll);
        }
        out.upper[i] = su;
        out.lower[i] = sl;
        max_up[i] = mu;
        max_lo[i] = ml;
    });
    for (std::size_t i = 0; i < words.size(); ++i) {
        out.max_upper_potential = std::max(out.max_upper_potential, max_up[i]);
        out.max_lower_potential = std::max(out.max_lower_potential, max_lo[i]);
    }
    return out;
}

/// (1/p) log sum_w exp(t * S_w).
inline double pressure_from_sums(std::span<const double> birkhoff_sums, double t, int p) {
    std::vector<double> weighted(birkhoff_sums.size());
    for (std::size_t i = 0; i < birkhoff_sums.size(); ++i) weighted[i] = t * birkhoff_sums[i];
    return log_sum_exp(weighted) / p;
}

struct PressureEstimate {
    double t = 0.0;
    int p = 0;
    double value = 0.0;    ///< P_p(t phi)
    double residual = 0.0; ///< |P_p - P_{p-1}|, 0 when p = 1
};

inline PressureEstimate pressure(const SemigroupSystem& system, PotentialKind kind, double t, int p,
                                 ComputeOptions options = {}) {
    if (p < 1) throw Error(ErrorKind::InvalidParameter, "period must be >= 1");
    const OrbitSums sums = orbit_sums(system, p, options);
    PressureEstimate out{t, p, pressure_from_sums(sums.sums(kind), t, p), 0.0};
    if (p > 1) {
        const OrbitSums prev = orbit_sums(system, p - 1, options);
        out.residual = std::abs(out.value - pressure_from_sums(prev.sums(kind), t, p - 1));
    }
    return out;
}

inline constexpr double kDefaultBisectionTolerance = 1e-10;

/// Root of t -> P_p(t phi) by bisection. P_p(0) >= 0 and
/// P_p(t) <= (1/p) log #Fix + t max(phi), so the bracket [0, t_hi] with
/// t_hi = (1/p) log #Fix / (-max phi) + 1 has a sign change whenever phi < 0.
inline double bowen_root_from_sums(const OrbitSums& sums, PotentialKind kind, double tol = kDefaultBisectionTolerance) {
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tolerance must be positive");
    const auto& s = sums.sums(kind);
    const double max_phi = sums.max_potential(kind);
    if (!(max_phi < 0.0))
        throw Error(ErrorKind::NoSignChange, std::string(to_string(kind)) + " potential is not strictly negative");
    const double entropy = std::log(static_cast<double>(s.size())) / sums.p;
    double lo = 0.0;
    double hi = entropy / (-max_phi) + 1.0;
    const auto P = [&](double t) { return pressure_from_sums(s, t, sums.p); };
    if (P(hi) >= 0.0) throw Error(ErrorKind::NoSignChange, "pressure does not change sign on the bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (P(mid) > 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (std::abs(P(root)) > tol)
        throw Error(ErrorKind::NoConvergence, "bisection ended with |P| above tolerance");
    return root;
}

inline double bowen_root(const SemigroupSystem& system, PotentialKind kind, double tol, int p,
                         ComputeOptions options = {}) {
    return bowen_root_from_sums(orbit_sums(system, p, options), kind, tol);
}

struct BoundsAtPeriod {
    int p = 0;
    double t_lo = 0.0;
    double t_up = 0.0;
    double residual_lo = 0.0; ///< |P_p(t_lo phi_lo)|
    double residual_up = 0.0;
};

struct DimensionBounds {
    double t_lo = 0.0;
    double t_up = 0.0;
    int p_used = 0;
    double pressure_residual_at_roots = 0.0;
    double bisection_tolerance = 0.0;
    /// |t(p_last) - t(p_prev)| for each root; 0 for a single-entry schedule.
    double root_change_lo = 0.0;
    double root_change_up = 0.0;
    bool converged = true;
    bool regular = true;
    std::vector<BoundsAtPeriod> schedule;
};

inline constexpr double kDefaultRootConvergence = 1e-3;

/// Bowen roots of the lower and upper potentials along a p-schedule.
/// `regular` is advisory: callers pass the Definition-1 verdict and the
/// bounds are computed either way.
inline DimensionBounds dimension_bounds(const SemigroupSystem& system, double tol, const std::vector<int>& p_schedule,
                                        bool regular = true, ComputeOptions options = {},
                                        double convergence_tolerance = kDefaultRootConvergence) {
    if (p_schedule.empty()) throw Error(ErrorKind::InvalidParameter, "empty p schedule");
    DimensionBounds out;
    out.bisection_tolerance = tol;
    out.regular = regular;
    for (int p : p_schedule) {
        const OrbitSums sums = orbit_sums(system, p, options);
        BoundsAtPeriod row;
        row.p = p;
        row.t_lo = bowen_root_from_sums(sums, PotentialKind::Lower, tol);
        row.t_up = bowen_root_from_sums(sums, PotentialKind::Upper, tol);
        row.residual_lo = std::abs(pressure_from_sums(sums.lower, row.t_lo, p));
        row.residual_up = std::abs(pressure_from_sums(sums.upper, row.t_up, p));
        out.schedule.push_back(row);
    }
    const BoundsAtPeriod& last = out.schedule.back();
    out.t_lo = last.t_lo;
    out.t_up = last.t_up;
    out.p_used = last.p;
    out.pressure_residual_at_roots = std::max(last.residual_lo, last.residual_up);
    if (out.schedule.size() > 1) {
        const BoundsAtPeriod& prev = out.schedule[out.schedule.size() - 2];
        out.root_change_lo = std::abs(last.t_lo - prev.t_lo);
        out.root_change_up = std::abs(last.t_up - prev.t_up);
    }
    out.converged = out.root_change_lo < convergence_tolerance && out.root_change_up < convergence_tolerance;
    return out;
}

/// Sampled diameters of g_w(W) over Sigma_p, lexicographic.
inline std::vector<double> cylinder_diameters(const SemigroupSystem& system, int p, int boundary_samples = 64,
                                              ComputeOptions options = {}) {
    const auto words = admissible_words(system.transition(), p, options.budget);
    std::vector<double> out(words.size());
    parallel_for(words.size(), options.jobs, [&](std::size_t i) {
        out[i] = cylinder_diameter(system, words[i], boundary_samples).sampled_diameter;
    });
    return out;
}

inline double diameter_sum_from(std::span<const double> diameters, double t) {
    CompensatedSum acc;
    for (double d : diameters) acc.add(std::pow(d, t));
    return acc.value();
}

inline double diameter_sum(const SemigroupSystem& system, double t, int p, ComputeOptions options = {}) {
    return diameter_sum_from(cylinder_diameters(system, p, 64, options), t);
}

} // namespace nonconf
