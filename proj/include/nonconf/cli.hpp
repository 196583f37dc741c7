#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nonconf/config.hpp"
#include "nonconf/distortion.hpp"
#include "nonconf/error.hpp"
#include "nonconf/fractal.hpp"
#include "nonconf/maps.hpp"
#include "nonconf/thermo.hpp"

namespace nonconf {

/// Process exit codes; each run ends in exactly one of them.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNonRegular = 3,
    kExitNonConverged = 4,
    kExitDistortionFail = 5,
};

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool resume = false;
    std::ostream* log = &std::cout;
};

namespace detail {

/// Key/value lines written both to the log stream and to summary.txt.
class Summary {
public:
    template <class T>
    void add(const std::string& key, const T& value) {
        std::ostringstream line;
        if constexpr (std::is_floating_point_v<T>) line << key << ": " << format_real(value);
        else if constexpr (std::is_same_v<T, bool>) line << key << ": " << (value ? "true" : "false");
        else line << key << ": " << value;
        lines_.push_back(line.str());
    }

    void emit(const CommandOptions& opt) const {
        std::ofstream out(opt.out_dir / "summary.txt", std::ios::binary);
        if (!out) throw Error(ErrorKind::Io, "cannot write summary.txt");
        for (const auto& l : lines_) {
            out << l << '\n';
            if (opt.log) *opt.log << l << '\n';
        }
    }

private:
    std::vector<std::string> lines_;
};

inline std::ofstream open_output(const CommandOptions& opt, const std::string& name) {
    std::ofstream out(opt.out_dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (opt.out_dir / name).string());
    return out;
}

inline std::string csv_quote(const std::string& s) {
    if (s.empty()) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else if (ch == '\n' || ch == '\r') out += ' ';
        else out += ch;
    }
    return out + "\"";
}

inline std::string family_label(const GeneratorFamily& family) {
    std::ostringstream s;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, AffineFamily>) s << "affine(" << f.branches.size() << " branches)";
            else if constexpr (std::is_same_v<T, QuadConjugateFamily>)
                s << "quad_conjugate(b=" << format_real(f.b.real()) << "," << format_real(f.b.imag())
                  << " c=" << format_real(f.c.real()) << "," << format_real(f.c.imag()) << ")";
            else
                s << "power_modulus(n=" << f.n << " gamma=" << format_real(f.gamma) << " c=" << format_real(f.c.real())
                  << "," << format_real(f.c.imag()) << ")";
        },
        family);
    return s.str();
}

/// Column names and values identifying the family in bounds.csv.
inline std::pair<std::string, std::string> family_columns(const GeneratorFamily& family) {
    return std::visit(
        [](const auto& f) -> std::pair<std::string, std::string> {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, AffineFamily>) return {"branches", std::to_string(f.branches.size())};
            else if constexpr (std::is_same_v<T, QuadConjugateFamily>)
                return {"b_re,b_im,c_re,c_im", format_real(f.b.real()) + "," + format_real(f.b.imag()) + "," +
                                                    format_real(f.c.real()) + "," + format_real(f.c.imag())};
            else
                return {"n,gamma,c_re,c_im", std::to_string(f.n) + "," + format_real(f.gamma) + "," +
                                                 format_real(f.c.real()) + "," + format_real(f.c.imag())};
        },
        family);
}

inline void add_bounds(Summary& s, const GlobalBounds& b) {
    s.add("l_max", b.l_max);
    s.add("s_min", b.s_min);
    s.add("K_max", b.K_max);
    s.add("beta", b.beta);
    s.add("beta_below_alpha", b.beta_below_alpha);
    s.add("margin", b.margin);
    s.add("regular", b.regular);
}

inline void prepare_out_dir(const CommandOptions& opt) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + opt.out_dir.string() + ": " + ec.message());
}

} // namespace detail

inline int cmd_regularity(const RunConfig& cfg, const CommandOptions& opt) {
    detail::prepare_out_dir(opt);
    const SemigroupSystem system = build_system(cfg.system);
    const GlobalBounds b = global_bounds(system, cfg.sample_density);
    detail::Summary s;
    s.add("command", "regularity");
    s.add("family", detail::family_label(cfg.system.family));
    s.add("alpha", system.alpha());
    s.add("holder_constant", system.holder_constant());
    detail::add_bounds(s, b);
    const int code = b.regular ? kExitOk : kExitNonRegular;
    s.add("exit_code", code);
    s.emit(opt);
    return code;
}

inline int cmd_bounds(const RunConfig& cfg, const CommandOptions& opt) {
    detail::prepare_out_dir(opt);
    const SemigroupSystem system = build_system(cfg.system);
    const GlobalBounds gb = global_bounds(system, cfg.sample_density);
    const DimensionBounds db = dimension_bounds(system, cfg.bisection_tolerance, cfg.p_schedule, gb.regular,
                                                {cfg.word_budget, opt.jobs}, cfg.convergence_tolerance);
    const auto [fam_head, fam_values] = detail::family_columns(cfg.system.family);
    auto csv = detail::open_output(opt, "bounds.csv");
    csv << fam_head << ",p,t_lo,t_up,residual_lo,residual_up\n";
    for (const auto& row : db.schedule)
        csv << fam_values << ',' << row.p << ',' << format_real(row.t_lo) << ',' << format_real(row.t_up) << ','
            << format_real(row.residual_lo) << ',' << format_real(row.residual_up) << '\n';

    detail::Summary s;
    s.add("command", "bounds");
    s.add("family", detail::family_label(cfg.system.family));
    s.add("regular", gb.regular);
    s.add("p_used", db.p_used);
    s.add("t_lo", db.t_lo);
    s.add("t_up", db.t_up);
    s.add("root_change_lo", db.root_change_lo);
    s.add("root_change_up", db.root_change_up);
    s.add("pressure_residual_at_roots", db.pressure_residual_at_roots);
    s.add("converged", db.converged);
    const int code = db.converged ? kExitOk : kExitNonConverged;
    s.add("exit_code", code);
    s.emit(opt);
    return code;
}

inline int cmd_distortion(const RunConfig& cfg, const CommandOptions& opt) {
    detail::prepare_out_dir(opt);
    const SemigroupSystem system = build_system(cfg.system);
    const GlobalBounds gb = global_bounds(system, cfg.sample_density);
    detail::Summary s;
    s.add("command", "distortion");
    s.add("family", detail::family_label(cfg.system.family));
    detail::add_bounds(s, gb);
    if (!gb.regular) {
        s.add("exit_code", static_cast<int>(kExitNonRegular));
        s.emit(opt);
        return kExitNonRegular;
    }
    TrialSettings settings{cfg.distortion.trials, opt.seed.value_or(cfg.seed), cfg.distortion.m_max,
                           cfg.distortion.samples};
    DistortionReport report;
    AngleReport angles;
    try {
        report = verify_theorem1(system, gb, cfg.distortion.epsilon, settings);
        angles = angle_report(system, gb, cfg.distortion.epsilon, settings, cfg.distortion.angle_buckets);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DeltaUnderflow && e.kind() != ErrorKind::BetaNotBelowAlpha) throw;
        s.add("error", e.what());
        s.add("exit_code", static_cast<int>(kExitDistortionFail));
        s.emit(opt);
        return kExitDistortionFail;
    }

    auto csv = detail::open_output(opt, "distortion.csv");
    csv << "trial,word_length,z_re,z_im,r,ratio_min,ratio_max,max_angle_dev,bound,pass\n";
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        const auto& t = report.trials[i];
        csv << i << ',' << t.word_length << ',' << format_real(t.z.real()) << ',' << format_real(t.z.imag()) << ','
            << format_real(t.r) << ',' << format_real(t.ratio_min) << ',' << format_real(t.ratio_max) << ','
            << format_real(t.max_angle_dev) << ',' << format_real(t.bound) << ',' << (t.pass ? 1 : 0) << '\n';
    }
    auto acsv = detail::open_output(opt, "angle.csv");
    acsv << "r,max_angle_dev,empirical_C\n";
    for (std::size_t b = 0; b < angles.radii.size(); ++b)
        acsv << format_real(angles.radii[b]) << ',' << format_real(angles.max_angle_dev[b]) << ','
             << format_real(angles.empirical_C[b]) << '\n';

    const auto& tc = report.constants;
    s.add("epsilon", tc.epsilon);
    s.add("delta", tc.delta);
    s.add("beta_used", tc.beta);
    s.add("theta", tc.theta);
    s.add("C_inf", tc.C_inf);
    s.add("recursion_holds", tc.recursion_holds);
    s.add("trials", report.trials.size());
    s.add("empirical_C", report.empirical_C);
    s.add("max_angle_dev", report.max_angle_dev);
    s.add("angle_monotone", angles.monotone);
    s.add("angle_vanishing_trend", angles.vanishing_trend);
    s.add("pass", report.pass);
    const int code = report.pass ? kExitOk : kExitDistortionFail;
    s.add("exit_code", code);
    s.emit(opt);
    return code;
}

inline int cmd_render(const RunConfig& cfg, const CommandOptions& opt) {
    detail::prepare_out_dir(opt);
    const RenderSettings& r = cfg.render;
    PointCloud cloud;
    if (r.mode == RenderMode::Preimages) {
        validate_family(cfg.system.family);
        if (kind_of(cfg.system.family) == FamilyKind::Affine)
            throw Error(ErrorKind::Config, "preimage rendering needs a polynomial-like family");
        cloud = julia_preimage_cloud(cfg.system.family, r.radius, r.depth, r.seeds,
                                     std::min<std::uint64_t>(cfg.word_budget, kPreimagePointCap));
    } else {
        const SemigroupSystem system = build_system(cfg.system);
        cloud = limit_set_cloud(system, r.depth, PlanarPoint(system.base_point()), cfg.word_budget);
    }
    BoundingBox box;
    if (r.bounds) {
        box = *r.bounds;
    } else {
        box = cloud_bounds(cloud);
        const double half = 0.5 * std::max({box.width(), box.height(), 1e-9}) * 1.05;
        const Complex c = box.center();
        box = {c.real() - half, c.imag() - half, c.real() + half, c.imag() + half};
    }
    const RasterImage img = rasterize(cloud, r.width, r.height, box);
    {
        auto pgm = detail::open_output(opt, "render.pgm");
        write_pgm(pgm, img);
        auto csv = detail::open_output(opt, "render.csv");
        write_csv(csv, cloud);
    }
    detail::Summary s;
    s.add("command", "render");
    s.add("family", detail::family_label(cfg.system.family));
    s.add("mode", r.mode == RenderMode::Preimages ? "preimages" : "limit_set");
    s.add("depth", r.depth);
    s.add("points", cloud.points.size());
    s.add("seeds", cloud.seeds);
    s.add("width", img.width);
    s.add("height", img.height);
    s.add("bounds", format_real(box.x_min) + "," + format_real(box.y_min) + "," + format_real(box.x_max) + "," +
                        format_real(box.y_max));
    s.add("white_components_4", count_components(img, 255, 4));
    s.add("black_components_8", count_components(img, 0, 8));
    s.add("exit_code", static_cast<int>(kExitOk));
    s.emit(opt);
    return kExitOk;
}

/// One sweep grid point, formatted as a CSV row without the trailing newline.
inline std::string sweep_row(const RunConfig& cfg, std::size_t index) {
    const SweepSpec& spec = *cfg.sweep;
    const auto values = spec.point(index);
    std::string row = std::to_string(index);
    for (double v : values) row += "," + format_real(v);
    try {
        SystemConfig sc = cfg.system;
        for (std::size_t k = 0; k < values.size(); ++k) sc.family = with_parameter(sc.family, spec.axes[k].name, values[k]);
        const SemigroupSystem system = build_system(sc);
        const GlobalBounds gb = global_bounds(system, cfg.sample_density);
        const DimensionBounds db =
            dimension_bounds(system, cfg.bisection_tolerance, cfg.p_schedule, gb.regular, {cfg.word_budget, 1},
                             cfg.convergence_tolerance);
        row += std::string(",") + (gb.regular ? "1" : "0") + "," + format_real(gb.K_max) + "," + format_real(db.t_lo) +
               "," + format_real(db.t_up) + ",";
        if (!db.converged) row += detail::csv_quote("not converged");
    } catch (const Error& e) {
        row += ",,,,," + detail::csv_quote(std::string(to_string(e.kind())) + ": " + e.what());
    }
    return row;
}

inline std::string sweep_header(const SweepSpec& spec) {
    std::string h = "index";
    for (const auto& a : spec.axes) h += "," + a.name;
    return h + ",regular,K_max,t_lo,t_up,error";
}

namespace detail {

/// Completed rows of an earlier run keyed by grid index. A file with a
/// different header is ignored; a truncated last line is dropped.
inline std::map<std::size_t, std::string> read_completed_rows(const std::filesystem::path& path,
                                                               const std::string& header, std::size_t grid_size) {
    std::map<std::size_t, std::string> rows;
    std::ifstream in(path, std::ios::binary);
    if (!in) return rows;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    bool first = true;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string line = content.substr(pos, nl - pos);
        pos = nl + 1;
        if (first) {
            if (line != header) return {};
            first = false;
            continue;
        }
        std::size_t idx = 0;
        const auto comma = line.find(',');
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + std::min(comma, line.size()), idx);
        if (ec != std::errc() || idx >= grid_size) continue;
        rows.emplace(idx, std::move(line));
    }
    return rows;
}

} // namespace detail

/// Grid points run on up to `jobs` threads; a single writer emits rows in
/// index order and flushes each one, so an interrupted file is a valid prefix.
inline int cmd_sweep(const RunConfig& cfg, const CommandOptions& opt) {
    if (!cfg.sweep) throw Error(ErrorKind::Config, "config has no sweep section");
    detail::prepare_out_dir(opt);
    const SweepSpec& spec = *cfg.sweep;
    const std::size_t total = spec.size();
    const std::string header = sweep_header(spec);
    const auto path = opt.out_dir / "sweep.csv";

    std::map<std::size_t, std::string> done;
    if (opt.resume) done = detail::read_completed_rows(path, header, total);
    const std::size_t reused = done.size();

    std::vector<std::optional<std::string>> rows(total);
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < total; ++i) {
        if (auto it = done.find(i); it != done.end()) rows[i] = std::move(it->second);
        else todo.push_back(i);
    }

    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    const int jobs = std::max(1, opt.jobs);
    {
        std::vector<std::jthread> workers;
        for (int t = 0; t < jobs; ++t) {
            workers.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < todo.size(); k = next.fetch_add(1)) {
                    std::string row = sweep_row(cfg, todo[k]);
                    std::lock_guard lock(mu);
                    rows[todo[k]] = std::move(row);
                    cv.notify_all();
                }
            });
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << header << '\n';
        out.flush();
        for (std::size_t i = 0; i < total; ++i) {
            std::string row;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return rows[i].has_value(); });
                row = *rows[i];
            }
            out << row << '\n';
            out.flush();
        }
    }

    std::size_t failures = 0;
    for (const auto& r : rows)
        if (r && r->back() == '"') ++failures;
    detail::Summary s;
    s.add("command", "sweep");
    s.add("family", detail::family_label(cfg.system.family));
    s.add("grid_points", total);
    s.add("reused_rows", reused);
    s.add("rows_with_error", failures);
    s.add("exit_code", static_cast<int>(kExitOk));
    s.emit(opt);
    return kExitOk;
}

/// Loads the config and runs one subcommand, mapping construction and
/// configuration errors to exit code 2.
inline int run_command(const std::string& command, const std::string& config_path, CommandOptions opt,
                       std::ostream& err = std::cerr) {
    try {
        const RunConfig cfg = load_config(config_path);
        if (command == "regularity") return cmd_regularity(cfg, opt);
        if (command == "bounds") return cmd_bounds(cfg, opt);
        if (command == "distortion") return cmd_distortion(cfg, opt);
        if (command == "render") return cmd_render(cfg, opt);
        if (command == "sweep") return cmd_sweep(cfg, opt);
        throw Error(ErrorKind::Config, "unknown command '" + command + "'");
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

} // namespace nonconf
