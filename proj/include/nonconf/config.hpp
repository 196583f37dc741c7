#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonconf/error.hpp"
#include "nonconf/maps.hpp"
#include "nonconf/region.hpp"
#include "nonconf/thermo.hpp"
#include "nonconf/transition.hpp"

namespace nonconf {

inline constexpr const char* kConfigSchema = "nonconf-ifs/1";

struct DistortionSettings {
    double epsilon = 0.5;
    int trials = 100;
    int m_max = 10;
    int samples = 256;
    int angle_buckets = 6;
};

enum class RenderMode { Preimages, LimitSet };

struct RenderSettings {
    RenderMode mode = RenderMode::Preimages;
    double radius = 4.0;
    int depth = 14;
    int seeds = 256;
    int width = 512;
    int height = 512;
    std::optional<BoundingBox> bounds;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    std::vector<SweepAxis> axes;

    std::size_t size() const {
        std::size_t total = 1;
        for (const auto& a : axes) total *= a.values.size();
        return total;
    }
    /// Row-major: the last axis varies fastest.
    std::vector<double> point(std::size_t index) const {
        std::vector<double> out(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            const auto m = axes[k].values.size();
            out[k] = axes[k].values[index % m];
            index /= m;
        }
        return out;
    }
};

struct RunConfig {
    SystemConfig system;
    std::vector<int> p_schedule{6, 8, 10, 12};
    double bisection_tolerance = kDefaultBisectionTolerance;
    double convergence_tolerance = kDefaultRootConvergence;
    int sample_density = 64;
    std::uint64_t word_budget = kDefaultWordBudget;
    std::uint64_t seed = 7;
    DistortionSettings distortion;
    RenderSettings render;
    std::optional<SweepSpec> sweep;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!names.count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
}

inline double get_real(const json& v, const std::string& where) {
    if (!v.is_number()) throw Error(ErrorKind::Config, where + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorKind::Config, where + " must be finite");
    return x;
}

inline int get_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw Error(ErrorKind::Config, where + " must be an integer");
    return v.get<int>();
}

/// A complex number is either a real scalar or [re, im].
inline Complex get_complex(const json& v, const std::string& where) {
    if (v.is_number()) return {get_real(v, where), 0.0};
    if (v.is_array() && v.size() == 2) return {get_real(v[0], where + "[0]"), get_real(v[1], where + "[1]")};
    throw Error(ErrorKind::Config, where + " must be a number or [re, im]");
}

inline double positive(double x, const std::string& where) {
    if (!(x > 0.0)) throw Error(ErrorKind::Config, where + " must be > 0");
    return x;
}

inline GeneratorFamily parse_family(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw Error(ErrorKind::Config, "family.kind is required");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine") {
        reject_unknown(j, {"kind", "branches"}, "family");
        AffineFamily f;
        if (!j.contains("branches") || !j["branches"].is_array()) throw Error(ErrorKind::Config, "family.branches must be an array");
        for (const auto& b : j["branches"]) {
            reject_unknown(b, {"a", "b", "t"}, "family.branches[]");
            f.branches.push_back({get_complex(b.at("a"), "a"), b.contains("b") ? get_complex(b["b"], "b") : Complex{},
                                  b.contains("t") ? get_complex(b["t"], "t") : Complex{}});
        }
        return f;
    }
    if (kind == "quad_conjugate") {
        reject_unknown(j, {"kind", "b", "c"}, "family");
        return QuadConjugateFamily{j.contains("b") ? get_complex(j["b"], "family.b") : Complex{},
                                   j.contains("c") ? get_complex(j["c"], "family.c") : Complex{}};
    }
    if (kind == "power_modulus") {
        reject_unknown(j, {"kind", "n", "gamma", "c"}, "family");
        PowerModulusFamily f;
        if (j.contains("n")) f.n = get_int(j["n"], "family.n");
        f.gamma = j.contains("gamma") ? get_real(j["gamma"], "family.gamma") : static_cast<double>(f.n);
        if (j.contains("c")) f.c = get_complex(j["c"], "family.c");
        return f;
    }
    throw Error(ErrorKind::Config, "unknown family kind '" + kind + "'");
}

inline Region parse_region(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "annulus") {
        reject_unknown(j, {"kind", "r_min", "r_max"}, "region");
        return Region::annulus(get_real(j.at("r_min"), "region.r_min"), get_real(j.at("r_max"), "region.r_max"));
    }
    if (kind == "disk") {
        reject_unknown(j, {"kind", "center", "radius"}, "region");
        return Region::disk(j.contains("center") ? get_complex(j["center"], "region.center") : Complex{},
                            get_real(j.at("radius"), "region.radius"));
    }
    if (kind == "rectangles") {
        reject_unknown(j, {"kind", "rects"}, "region");
        RectangleUnion u;
        for (const auto& r : j.at("rects")) {
            if (!r.is_array() || r.size() != 4) throw Error(ErrorKind::Config, "region.rects[] must be [x0, y0, x1, y1]");
            u.rects.push_back({get_real(r[0], "x0"), get_real(r[1], "y0"), get_real(r[2], "x1"), get_real(r[3], "y1")});
        }
        return Region(u);
    }
    throw Error(ErrorKind::Config, "unknown region kind '" + kind + "'");
}

inline const std::set<std::string>& sweep_parameter_names() {
    static const std::set<std::string> names{"b_re", "b_im", "c_re", "c_im", "gamma", "gamma_minus_n"};
    return names;
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::get_int;
    using detail::get_real;
    using detail::positive;
    detail::reject_unknown(j, {"schema", "family", "region", "transition", "alpha", "holder_constant", "p_schedule",
                               "tolerances", "sample_density", "word_budget", "seed", "distortion", "render", "sweep"},
                           "config");
    if (!j.contains("schema") || j["schema"] != kConfigSchema)
        throw Error(ErrorKind::Config, std::string("schema must be \"") + kConfigSchema + "\"");
    if (!j.contains("family")) throw Error(ErrorKind::Config, "family is required");

    RunConfig cfg;
    cfg.system.family = detail::parse_family(j["family"]);
    if (j.contains("region")) cfg.system.region = detail::parse_region(j["region"]);
    else if (kind_of(cfg.system.family) == FamilyKind::Affine) cfg.system.region = Region::unit_square();
    if (j.contains("transition")) {
        try {
            cfg.system.transition = TransitionMatrix(j["transition"].get<std::vector<std::vector<int>>>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Config, std::string("transition: ") + e.what());
        }
    }
    if (j.contains("alpha")) cfg.system.alpha = get_real(j["alpha"], "alpha");
    if (j.contains("holder_constant")) cfg.system.holder_constant = get_real(j["holder_constant"], "holder_constant");
    if (j.contains("p_schedule")) {
        cfg.p_schedule.clear();
        for (const auto& p : j["p_schedule"]) {
            const int v = get_int(p, "p_schedule[]");
            if (v < 1) throw Error(ErrorKind::Config, "p_schedule entries must be >= 1");
            cfg.p_schedule.push_back(v);
        }
        if (cfg.p_schedule.empty()) throw Error(ErrorKind::Config, "p_schedule must not be empty");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        detail::reject_unknown(t, {"bisection", "convergence"}, "tolerances");
        if (t.contains("bisection")) cfg.bisection_tolerance = positive(get_real(t["bisection"], "tolerances.bisection"), "tolerances.bisection");
        if (t.contains("convergence")) cfg.convergence_tolerance = positive(get_real(t["convergence"], "tolerances.convergence"), "tolerances.convergence");
    }
    if (j.contains("sample_density")) cfg.sample_density = get_int(j["sample_density"], "sample_density");
    if (cfg.sample_density < 16) throw Error(ErrorKind::Config, "sample_density must be >= 16");
    if (j.contains("word_budget")) {
        if (!j["word_budget"].is_number_unsigned() || j["word_budget"].get<std::uint64_t>() == 0)
            throw Error(ErrorKind::Config, "word_budget must be a positive integer");
        cfg.word_budget = j["word_budget"].get<std::uint64_t>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw Error(ErrorKind::Config, "seed must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("distortion")) {
        const auto& d = j["distortion"];
        detail::reject_unknown(d, {"epsilon", "trials", "m_max", "samples", "angle_buckets"}, "distortion");
        if (d.contains("epsilon")) cfg.distortion.epsilon = positive(get_real(d["epsilon"], "distortion.epsilon"), "distortion.epsilon");
        if (d.contains("trials")) cfg.distortion.trials = get_int(d["trials"], "distortion.trials");
        if (d.contains("m_max")) cfg.distortion.m_max = get_int(d["m_max"], "distortion.m_max");
        if (d.contains("samples")) cfg.distortion.samples = get_int(d["samples"], "distortion.samples");
        if (d.contains("angle_buckets")) cfg.distortion.angle_buckets = get_int(d["angle_buckets"], "distortion.angle_buckets");
        if (cfg.distortion.trials < 1 || cfg.distortion.m_max < 1 || cfg.distortion.samples < 256 ||
            cfg.distortion.angle_buckets < 2)
            throw Error(ErrorKind::Config, "distortion: trials >= 1, m_max >= 1, samples >= 256, angle_buckets >= 2");
    }
    if (j.contains("render")) {
        const auto& r = j["render"];
        detail::reject_unknown(r, {"mode", "radius", "depth", "seeds", "width", "height", "bounds"}, "render");
        if (r.contains("mode")) {
            const std::string mode = r["mode"].get<std::string>();
            if (mode == "preimages") cfg.render.mode = RenderMode::Preimages;
            else if (mode == "limit_set") cfg.render.mode = RenderMode::LimitSet;
            else throw Error(ErrorKind::Config, "render.mode must be preimages or limit_set");
        }
        if (r.contains("radius")) cfg.render.radius = positive(get_real(r["radius"], "render.radius"), "render.radius");
        if (r.contains("depth")) cfg.render.depth = get_int(r["depth"], "render.depth");
        if (r.contains("seeds")) cfg.render.seeds = get_int(r["seeds"], "render.seeds");
        if (r.contains("width")) cfg.render.width = get_int(r["width"], "render.width");
        if (r.contains("height")) cfg.render.height = get_int(r["height"], "render.height");
        if (r.contains("bounds")) {
            const auto& b = r["bounds"];
            if (!b.is_array() || b.size() != 4) throw Error(ErrorKind::Config, "render.bounds must be [x0, y0, x1, y1]");
            cfg.render.bounds = BoundingBox{get_real(b[0], "x0"), get_real(b[1], "y0"), get_real(b[2], "x1"), get_real(b[3], "y1")};
        }
        if (cfg.render.width < 1 || cfg.render.height < 1 || cfg.render.seeds < 1 || cfg.render.depth < 0)
            throw Error(ErrorKind::Config, "render: width, height, seeds must be >= 1 and depth >= 0");
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        detail::reject_unknown(s, {"axes"}, "sweep");
        SweepSpec spec;
        for (const auto& a : s.at("axes")) {
            detail::reject_unknown(a, {"name", "values"}, "sweep.axes[]");
            SweepAxis axis{a.at("name").get<std::string>(), {}};
            if (!detail::sweep_parameter_names().count(axis.name))
                throw Error(ErrorKind::Config, "unknown sweep parameter '" + axis.name + "'");
            for (const auto& v : a.at("values")) axis.values.push_back(get_real(v, "sweep value"));
            if (axis.values.empty()) throw Error(ErrorKind::Config, "sweep axis '" + axis.name + "' has no values");
            spec.axes.push_back(std::move(axis));
        }
        if (spec.axes.empty()) throw Error(ErrorKind::Config, "sweep needs at least one axis");
        if (spec.size() > cfg.word_budget) throw Error(ErrorKind::Config, "sweep grid exceeds the budget");
        cfg.sweep = std::move(spec);
    }
    cfg.word_budget = word_budget_from_env(cfg.word_budget);
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Family with one sweep parameter overridden.
inline GeneratorFamily with_parameter(GeneratorFamily family, const std::string& name, double value) {
    if (auto* q = std::get_if<QuadConjugateFamily>(&family)) {
        if (name == "b_re") q->b.real(value);
        else if (name == "b_im") q->b.imag(value);
        else if (name == "c_re") q->c.real(value);
        else if (name == "c_im") q->c.imag(value);
        else throw Error(ErrorKind::Config, "parameter '" + name + "' does not apply to quad_conjugate");
    } else if (auto* pm = std::get_if<PowerModulusFamily>(&family)) {
        if (name == "gamma") pm->gamma = value;
        else if (name == "gamma_minus_n") pm->gamma = pm->n + value;
        else if (name == "c_re") pm->c.real(value);
        else if (name == "c_im") pm->c.imag(value);
        else throw Error(ErrorKind::Config, "parameter '" + name + "' does not apply to power_modulus");
    } else {
        throw Error(ErrorKind::Config, "affine families cannot be swept");
    }
    return family;
}

} // namespace nonconf
