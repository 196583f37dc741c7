#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "nonconf/error.hpp"
#include "nonconf/linear.hpp"
#include "nonconf/maps.hpp"
#include "nonconf/rng.hpp"
#include "nonconf/symdyn.hpp"

namespace nonconf {

/// The constant ledger behind the ellipse-containment estimate.
struct TheoreticalConstants {
    double epsilon = 0.0;
    double delta = 0.0;
    double L0 = 0.0;
    double alpha = 1.0;
    double beta = 0.0; ///< exponent actually used, in (0, alpha)
    double l = 0.0;
    double s = 0.0;
    double kappa_inf = 0.0;
    double theta = 0.0;
    double C_inf = 0.0;
    std::vector<double> kappa; ///< kappa_m, m = 0..m_max
    std::vector<double> C;     ///< C_m, m = 0..m_max
    std::vector<double> B;     ///< B_M, M = 1..m_max (B[0] unused)
    bool recursion_holds = false;

    /// Bound for a word of `length` >= 1 generators (a composition of m + 1 maps uses C_m).
    double bound_for_length(std::size_t length) const {
        if (length == 0) return 1.0;
        const std::size_t m = std::min(length - 1, C.size() - 1);
        return C[m];
    }
};

inline constexpr double kMinDelta = 1e-6;

namespace detail {

/// Sampled check of |R_i(w, z)| <= (eps/2) s |w - z| at |w - z| = delta.
inline bool remainder_condition_holds(const SemigroupSystem& system, double delta, double epsilon, double s_min) {
    const InverseBranches& g = system.branches();
    const auto grid = system.region().grid(16);
    for (int i = 0; i < g.count(); ++i) {
        for (const Complex z : grid) {
            const Complex gz = g.eval(i, z);
            const WirtingerDerivative d = g.derivative_at_image(i, gz);
            for (double radius : {delta, 0.5 * delta}) {
                for (int k = 0; k < 8; ++k) {
                    const Complex w = z + std::polar(radius, 2.0 * std::numbers::pi * k / 8 + 0.05);
                    if (!system.region().contains(w, 0.0)) continue;
                    const Complex gw = g.eval(i, w);
                    if (!same_chart(z, w, gz, gw)) continue;
                    if (std::abs(gw - gz - d.apply(w - z)) > 0.5 * epsilon * s_min * radius) return false;
                }
            }
        }
    }
    return true;
}

} // namespace detail

/// delta(eps) by halving from min(inradius / 2, 1) until the linearisation
/// remainder is within (eps/2) s |w - z| on sampled pairs and Theta <= 1;
/// then the C_m table and the recursion C_{M-1} + B_M <= C_M.
///
/// A conformal system has beta = 0 from data, which would pin C_m above 2
/// for every eps. Any beta in (0, alpha) above the data value satisfies
/// K_i <= (1/l_i)^beta, so max(beta_data, alpha/2) is used.
inline TheoreticalConstants theoretical_constants(const SemigroupSystem& system, const GlobalBounds& bounds,
                                                  double epsilon, int m_max) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidParameter, "epsilon must be positive");
    if (m_max < 0) throw Error(ErrorKind::InvalidParameter, "m_max must be >= 0");
    const double alpha = system.alpha();
    if (!bounds.beta_below_alpha || bounds.beta >= alpha)
        throw Error(ErrorKind::BetaNotBelowAlpha, "beta = " + std::to_string(bounds.beta) + " is not below alpha");

    TheoreticalConstants tc;
    tc.epsilon = epsilon;
    tc.alpha = alpha;
    tc.beta = std::max(bounds.beta, 0.5 * alpha);
    tc.l = bounds.l_max;
    tc.s = bounds.s_min;
    tc.L0 = system.holder_constant();
    const double q = std::pow(tc.l, alpha - tc.beta);
    tc.kappa_inf = 1.0 / (1.0 - q);

    const auto theta_of = [&](double delta) {
        return (tc.L0 / tc.s) * std::pow(1.0 + epsilon + tc.kappa_inf, 1.0 + alpha) * std::pow(delta, alpha - tc.beta);
    };
    double delta = std::min(0.5 * system.region().inradius(), 1.0);
    while (true) {
        if (delta < kMinDelta)
            throw Error(ErrorKind::DeltaUnderflow, "no delta >= 1e-6 satisfies the remainder and Theta conditions");
        if (theta_of(delta) <= 1.0 && (tc.L0 == 0.0 || detail::remainder_condition_holds(system, delta, epsilon, tc.s)))
            break;
        delta *= 0.5;
    }
    tc.delta = delta;
    tc.theta = theta_of(delta);

    const double delta_beta = std::pow(delta, tc.beta);
    tc.kappa.resize(static_cast<std::size_t>(m_max) + 1);
    tc.C.resize(tc.kappa.size());
    tc.B.assign(tc.kappa.size(), 0.0);
    double kappa = 0.0, term = 1.0;
    for (int m = 0; m <= m_max; ++m) {
        kappa += term;
        term *= q;
        tc.kappa[m] = kappa;
        tc.C[m] = 1.0 + epsilon + delta_beta * kappa;
    }
    tc.C_inf = 1.0 + epsilon + delta_beta * tc.kappa_inf;
    tc.recursion_holds = true;
    for (int M = 1; M <= m_max; ++M) {
        tc.B[M] = (tc.L0 / tc.s) * std::pow(tc.C[M - 1], 1.0 + alpha) * std::pow(delta, alpha) *
                  std::pow(tc.l, (alpha - tc.beta) * M);
        if (tc.C[M - 1] + tc.B[M] > tc.C[M] * (1.0 + 1e-14)) tc.recursion_holds = false;
    }
    return tc;
}

struct DistortionTrial {
    std::size_t word_length = 0;
    Complex z{};
    double r = 0.0;
    double ratio_min = 1.0;
    double ratio_max = 1.0;
    double max_angle_dev = 0.0;
    /// Some stage of the composition carried part of the circle across a
    /// sector cut; the ratios are then meaningless.
    bool chart_crossing = false;
    double bound = 1.0; ///< C_m used for the verdict
    bool pass = true;
};

/// Ratios |D(g_w)(z)^{-1}(g_w(w_j) - g_w(z))| / r over `samples` points w_j on
/// the circle |w - z| = r, and the largest angle between g_w(w_j) - g_w(z)
/// and D(g_w)(z)(w_j - z).
inline DistortionTrial empirical_distortion(const SemigroupSystem& system, const Word& w, Complex z, double r,
                                            int samples) {
    if (samples < 256) throw Error(ErrorKind::InvalidParameter, "samples must be >= 256");
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidParameter, "radius must be positive");
    if (!system.region().contains_ball(z, r)) throw Error(ErrorKind::OutsideRegion, "B(z, r) leaves the region");
    if (!system.transition().admissible(w)) throw Error(ErrorKind::InvalidParameter, "word " + w.str() + " is not admissible");

    const InverseBranches& g = system.branches();
    std::vector<Complex> pts(static_cast<std::size_t>(samples));
    std::vector<Complex> offsets(pts.size());
    for (int j = 0; j < samples; ++j) {
        offsets[j] = std::polar(r, 2.0 * std::numbers::pi * j / samples);
        pts[j] = z + offsets[j];
    }
    DistortionTrial trial;
    trial.word_length = w.size();
    trial.z = z;
    trial.r = r;

    Complex center = z;
    WirtingerDerivative d{1.0, 0.0};
    std::vector<Complex> next(pts.size());
    for (std::size_t k = w.size(); k-- > 0;) {
        const Complex c_next = g.eval(w[k], center);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            next[j] = g.eval(w[k], pts[j]);
            if (!same_chart(center, pts[j], c_next, next[j])) trial.chart_crossing = true;
        }
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const std::size_t i = (j + 1) % pts.size();
            if (!same_chart(pts[j], pts[i], next[j], next[i])) trial.chart_crossing = true;
        }
        d = compose(g.derivative_at_image(w[k], c_next), d);
        center = c_next;
        pts.swap(next);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, angle = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const Complex delta_image = pts[j] - center;
        const double ratio = std::abs(solve_linear(d, delta_image)) / r;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        angle = std::max(angle, angle_between(delta_image, d.apply(offsets[j])));
    }
    trial.ratio_min = lo;
    trial.ratio_max = hi;
    trial.max_angle_dev = angle;
    return trial;
}

namespace detail {

inline Word random_word(const TransitionMatrix& a, std::size_t length, SplitMix64& rng) {
    Word w;
    if (length == 0) return w;
    w.symbols.push_back(rng.below(a.size()));
    while (w.size() < length) {
        std::vector<int> successors;
        for (int j = 0; j < a.size(); ++j)
            if (a.allowed(w.symbols.back(), j)) successors.push_back(j);
        w.symbols.push_back(successors[static_cast<std::size_t>(rng.below(static_cast<int>(successors.size())))]);
    }
    return w;
}

inline Complex random_center(const Region& region, double r, SplitMix64& rng) {
    const BoundingBox box = region.bounding_box();
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const Complex z(rng.uniform(box.x_min, box.x_max), rng.uniform(box.y_min, box.y_max));
        if (region.contains_ball(z, r)) return z;
    }
    throw Error(ErrorKind::InvalidParameter, "radius too large for the region interior");
}

/// A trial whose circles (at every radius in `radii`) stay inside one chart.
template <class Run>
std::vector<DistortionTrial> draw_trial(const SemigroupSystem& system, std::size_t length, double max_radius,
                                        SplitMix64& rng, Run&& run) {
    const Word w = random_word(system.transition(), length, rng);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Complex z = random_center(system.region(), max_radius, rng);
        auto trials = run(w, z);
        if (std::none_of(trials.begin(), trials.end(), [](const auto& t) { return t.chart_crossing; })) return trials;
    }
    throw Error(ErrorKind::InvalidParameter, "could not place a trial disk inside a single chart");
}

} // namespace detail

struct DistortionReport {
    TheoreticalConstants constants;
    std::vector<DistortionTrial> trials;
    double empirical_C = 1.0; ///< max over trials of max(ratio_max, 1/ratio_min)
    double max_angle_dev = 0.0;
    bool pass = true;
};

struct TrialSettings {
    int trials = 100;
    std::uint64_t seed = 7;
    int m_max = 10;
    int samples = 256;
};

/// Randomised ellipse-containment check at r = delta(eps): word length
/// uniform in [1, m_max], centre uniform over points whose delta-disk fits in
/// the region. PASS iff every trial lies in [1/C_{m-1}, C_{m-1}] for its length m.
inline DistortionReport verify_theorem1(const SemigroupSystem& system, const GlobalBounds& bounds, double epsilon,
                                        TrialSettings settings = {}) {
    DistortionReport report;
    report.constants = theoretical_constants(system, bounds, epsilon, settings.m_max);
    const double r = report.constants.delta;
    SplitMix64 rng(settings.seed);
    for (int t = 0; t < settings.trials; ++t) {
        const auto length = static_cast<std::size_t>(1 + rng.below(settings.m_max));
        auto drawn = detail::draw_trial(system, length, r, rng, [&](const Word& w, Complex z) {
            return std::vector<DistortionTrial>{empirical_distortion(system, w, z, r, settings.samples)};
        });
        DistortionTrial trial = drawn.front();
        trial.bound = report.constants.bound_for_length(trial.word_length);
        const double slack = 1e-12;
        trial.pass = trial.ratio_max <= trial.bound * (1.0 + slack) && trial.ratio_min >= (1.0 - slack) / trial.bound;
        report.pass = report.pass && trial.pass;
        report.empirical_C = std::max({report.empirical_C, trial.ratio_max, 1.0 / trial.ratio_min});
        report.max_angle_dev = std::max(report.max_angle_dev, trial.max_angle_dev);
        report.trials.push_back(trial);
    }
    report.pass = report.pass && report.constants.recursion_holds;
    return report;
}

struct AngleReport {
    std::vector<double> radii;
    std::vector<double> max_angle_dev; ///< per radius bucket
    std::vector<double> empirical_C;   ///< per radius bucket
    bool monotone = true;              ///< non-increasing as r shrinks
    bool vanishing_trend = true;       ///< last bucket <= first bucket / 4
};

/// Angle deviation per radius bucket, each trial (word, centre) reused at every radius.
inline AngleReport angle_report(const SemigroupSystem& system, std::vector<double> radii, TrialSettings settings = {}) {
    if (radii.empty()) throw Error(ErrorKind::InvalidParameter, "no radii");
    std::sort(radii.begin(), radii.end(), std::greater<>());
    AngleReport report;
    report.radii = radii;
    report.max_angle_dev.assign(radii.size(), 0.0);
    report.empirical_C.assign(radii.size(), 1.0);
    SplitMix64 rng(settings.seed);
    for (int t = 0; t < settings.trials; ++t) {
        const auto length = static_cast<std::size_t>(1 + rng.below(settings.m_max));
        const auto trials = detail::draw_trial(system, length, radii.front(), rng, [&](const Word& w, Complex z) {
            std::vector<DistortionTrial> out;
            for (double r : radii) out.push_back(empirical_distortion(system, w, z, r, settings.samples));
            return out;
        });
        for (std::size_t b = 0; b < radii.size(); ++b) {
            report.max_angle_dev[b] = std::max(report.max_angle_dev[b], trials[b].max_angle_dev);
            report.empirical_C[b] = std::max({report.empirical_C[b], trials[b].ratio_max, 1.0 / trials[b].ratio_min});
        }
    }
    for (std::size_t b = 1; b < radii.size(); ++b)
        if (report.max_angle_dev[b] > report.max_angle_dev[b - 1] * (1.0 + 1e-9) + 1e-15) report.monotone = false;
    report.vanishing_trend = report.max_angle_dev.back() <= report.max_angle_dev.front() / 4.0 + 1e-15;
    return report;
}

/// Buckets delta(eps) / 2^j, j = 0..buckets-1.
inline AngleReport angle_report(const SemigroupSystem& system, const GlobalBounds& bounds, double epsilon,
                                TrialSettings settings = {}, int buckets = 6) {
    const TheoreticalConstants tc = theoretical_constants(system, bounds, epsilon, settings.m_max);
    std::vector<double> radii;
    for (int j = 0; j < buckets; ++j) radii.push_back(tc.delta / std::pow(2.0, j));
    return angle_report(system, radii, settings);
}

} // namespace nonconf
