#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonconf/cli.hpp"

using namespace nonconf;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("nonconf_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

CommandOptions quiet(const fs::path& dir) {
    static std::ostringstream sink;
    CommandOptions o;
    o.out_dir = dir;
    o.log = &sink;
    return o;
}

ErrorKind config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "accepted: " << text;
    return ErrorKind::Io;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(NONCONF_IFS_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kQuad = R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate", "b": 0.1, "c": 0.1}})";

const char* kSweep = R"({
  "schema": "nonconf-ifs/1",
  "family": {"kind": "quad_conjugate", "b": 0, "c": 0.1},
  "p_schedule": [6],
  "sweep": {"axes": [{"name": "b_re", "values": [-0.02, 0, 0.02]}, {"name": "b_im", "values": [0, 0.01]}]}
})";

} // namespace

TEST(Config, ParsesFamiliesAndDefaults) {
    const RunConfig q = parse_config_text(kQuad);
    const auto& fam = std::get<QuadConjugateFamily>(q.system.family);
    EXPECT_EQ(fam.b, Complex(0.1, 0.0));
    EXPECT_TRUE(q.system.region.is_annulus());
    EXPECT_EQ(q.p_schedule, (std::vector<int>{6, 8, 10, 12}));
    EXPECT_EQ(q.seed, 7u);

    const RunConfig a = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "affine", "branches": [{"a": [0.5, 0], "b": 0.1, "t": [0.2, 0.3]}]}})");
    EXPECT_FALSE(a.system.region.is_annulus());
    const auto& br = std::get<AffineFamily>(a.system.family).branches.at(0);
    EXPECT_EQ(br.t, Complex(0.2, 0.3));

    const RunConfig p = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "power_modulus", "n": 3, "c": [0, 0.1]},
        "region": {"kind": "annulus", "r_min": 0.8, "r_max": 1.2},
        "transition": [[1, 1, 0], [1, 1, 1], [1, 0, 1]],
        "tolerances": {"bisection": 1e-9, "convergence": 1e-2}})");
    EXPECT_EQ(std::get<PowerModulusFamily>(p.system.family).gamma, 3.0);
    ASSERT_TRUE(p.system.transition.has_value());
    EXPECT_EQ(p.bisection_tolerance, 1e-9);
}

TEST(Config, RejectsInvalidDocuments) {
    EXPECT_EQ(config_error("{"), ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"family": {"kind": "quad_conjugate"}})"), ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/0", "family": {"kind": "quad_conjugate"}})"), ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"}, "extra": 1})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate", "lambda": 1}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "cubic"}})"), ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"},
                               "tolerances": {"bisection": 0}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"},
                               "tolerances": {"convergence": -1}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate", "b": [1, 2, 3]}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"},
                               "sweep": {"axes": [{"name": "lambda", "values": [0]}]}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"},
                               "sweep": {"axes": [{"name": "b_re", "values": []}]}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"}, "word_budget": 4,
                               "sweep": {"axes": [{"name": "b_re", "values": [0, 1, 2, 3, 4]}]}})"),
              ErrorKind::Config);
    EXPECT_EQ(config_error(R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"}, "p_schedule": [0]})"),
              ErrorKind::Config);
}

TEST(Config, BudgetEnvironmentOverride) {
    ::setenv("NONCONF_IFS_BUDGET", "100", 1);
    const RunConfig c = parse_config_text(kQuad);
    ::setenv("NONCONF_IFS_BUDGET", "abc", 1);
    EXPECT_THROW(parse_config_text(kQuad), Error);
    ::unsetenv("NONCONF_IFS_BUDGET");
    EXPECT_EQ(c.word_budget, 100u);
    EXPECT_EQ(parse_config_text(kQuad).word_budget, kDefaultWordBudget);
}

TEST(Config, SweepGridRowMajor) {
    const RunConfig c = parse_config_text(kSweep);
    ASSERT_TRUE(c.sweep.has_value());
    EXPECT_EQ(c.sweep->size(), 6u);
    EXPECT_EQ(c.sweep->point(0), (std::vector<double>{-0.02, 0.0}));
    EXPECT_EQ(c.sweep->point(1), (std::vector<double>{-0.02, 0.01}));
    EXPECT_EQ(c.sweep->point(5), (std::vector<double>{0.02, 0.01}));
    const auto fam = with_parameter(QuadConjugateFamily{0.0, 0.1}, "b_im", 0.5);
    EXPECT_EQ(std::get<QuadConjugateFamily>(fam).b, Complex(0.0, 0.5));
    const auto pm = with_parameter(PowerModulusFamily{2, 2.0, 0.0}, "gamma_minus_n", 0.25);
    EXPECT_EQ(std::get<PowerModulusFamily>(pm).gamma, 2.25);
    EXPECT_THROW(with_parameter(QuadConjugateFamily{}, "gamma", 1.0), Error);
}

TEST(Commands, RegularityVerdicts) {
    TempDir dir;
    EXPECT_EQ(cmd_regularity(parse_config_text(kQuad), quiet(dir.path())), kExitOk);
    const std::string summary = read_file(dir.path() / "summary.txt");
    EXPECT_NE(summary.find("regular: true"), std::string::npos);
    EXPECT_NE(summary.find("K_max: "), std::string::npos);

    // diag(0.9, 0.1): K = 9 > 1/l
    const RunConfig bad = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "affine", "branches": [{"a": 0.5, "b": 0.4}]}})");
    EXPECT_EQ(cmd_regularity(bad, quiet(dir.path())), kExitNonRegular);
    EXPECT_EQ(cmd_distortion(bad, quiet(dir.path())), kExitNonRegular);
    EXPECT_FALSE(fs::exists(dir.path() / "distortion.csv"));
}

TEST(Commands, BoundsCsv) {
    TempDir dir;
    const RunConfig c = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "affine", "branches": [{"a": 0.3333333333333333}, {"a": 0.3333333333333333, "t": 0.6666666666666666}]},
        "p_schedule": [6, 8]})");
    EXPECT_EQ(cmd_bounds(c, quiet(dir.path())), kExitOk);
    const std::string csv = read_file(dir.path() / "bounds.csv");
    std::istringstream in(csv);
    std::string header, row6, row8;
    std::getline(in, header);
    std::getline(in, row6);
    std::getline(in, row8);
    EXPECT_EQ(header, "branches,p,t_lo,t_up,residual_lo,residual_up");
    EXPECT_EQ(row8.rfind("2,8,0.630929753", 0), 0u) << row8;
}

TEST(Commands, BoundsNotConverged) {
    TempDir dir;
    RunConfig c = parse_config_text(kQuad);
    c.p_schedule = {4, 6};
    c.convergence_tolerance = 1e-9;
    EXPECT_EQ(cmd_bounds(c, quiet(dir.path())), kExitNonConverged);
    EXPECT_TRUE(fs::exists(dir.path() / "bounds.csv"));
}

TEST(Commands, DistortionPassAndFailure) {
    TempDir dir;
    RunConfig c = parse_config_text(kQuad);
    c.distortion.trials = 20;
    EXPECT_EQ(cmd_distortion(c, quiet(dir.path())), kExitOk);
    const std::string csv = read_file(dir.path() / "distortion.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
    EXPECT_TRUE(fs::exists(dir.path() / "angle.csv"));

    c.system.holder_constant = 1e12;
    EXPECT_EQ(cmd_distortion(c, quiet(dir.path())), kExitDistortionFail);
}

TEST(Commands, RenderOutputs) {
    TempDir dir;
    const RunConfig c = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "quad_conjugate", "b": 0, "c": 0},
        "render": {"mode": "preimages", "radius": 4, "depth": 1, "seeds": 64, "width": 32, "height": 16,
                   "bounds": [-2.5, -2.5, 2.5, 2.5]}})");
    EXPECT_EQ(cmd_render(c, quiet(dir.path())), kExitOk);
    const std::string pgm = read_file(dir.path() / "render.pgm");
    EXPECT_EQ(pgm.substr(0, 13), "P5\n32 16\n255\n");
    EXPECT_EQ(pgm.size(), 13u + 32 * 16);
    const std::string csv = read_file(dir.path() / "render.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 128);

    const RunConfig cantor = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "affine", "branches": [{"a": 0.3333333333333333}, {"a": 0.3333333333333333, "t": 0.6666666666666666}]},
        "render": {"mode": "limit_set", "depth": 9}})");
    EXPECT_EQ(cmd_render(cantor, quiet(dir.path())), kExitOk);
    const std::string ccsv = read_file(dir.path() / "render.csv");
    EXPECT_EQ(std::count(ccsv.begin(), ccsv.end(), '\n'), 1 + 512);
}

TEST(Commands, SweepDeterministicAndResumable) {
    const RunConfig c = parse_config_text(kSweep);
    TempDir a, b, r;
    auto oa = quiet(a.path());
    auto ob = quiet(b.path());
    ob.jobs = 3;
    EXPECT_EQ(cmd_sweep(c, oa), kExitOk);
    EXPECT_EQ(cmd_sweep(c, ob), kExitOk);
    const std::string full = read_file(a.path() / "sweep.csv");
    EXPECT_EQ(full, read_file(b.path() / "sweep.csv"));
    EXPECT_EQ(std::count(full.begin(), full.end(), '\n'), 1 + 6);
    EXPECT_EQ(full.substr(0, full.find('\n')), "index,b_re,b_im,regular,K_max,t_lo,t_up,error");

    // interrupted after two rows with a torn third line
    std::size_t cut = 0;
    for (int i = 0; i < 3; ++i) cut = full.find('\n', cut) + 1;
    write_file(r.path() / "sweep.csv", full.substr(0, cut) + "2,0,0,1,1,1.00");
    auto orr = quiet(r.path());
    orr.resume = true;
    orr.jobs = 2;
    EXPECT_EQ(cmd_sweep(c, orr), kExitOk);
    EXPECT_EQ(read_file(r.path() / "sweep.csv"), full);
    EXPECT_NE(read_file(r.path() / "summary.txt").find("reused_rows: 2"), std::string::npos);
}

TEST(Commands, SweepRecordsPointFailures) {
    TempDir dir;
    const RunConfig c = parse_config_text(R"({"schema": "nonconf-ifs/1",
        "family": {"kind": "quad_conjugate", "b": 0, "c": 0.1}, "p_schedule": [4],
        "sweep": {"axes": [{"name": "b_re", "values": [0, 1.6]}]}})");
    EXPECT_EQ(cmd_sweep(c, quiet(dir.path())), kExitOk);
    const std::string csv = read_file(dir.path() / "sweep.csv");
    EXPECT_NE(csv.find("1,1.6000000000000001,,,,,\"InvalidParameter"), std::string::npos) << csv;
}

TEST(Binary, ExitCodes) {
    TempDir dir;
    const fs::path good = dir.path() / "good.json";
    write_file(good, kQuad);
    const fs::path nc = dir.path() / "nc.json";
    write_file(nc, R"({"schema": "nonconf-ifs/1", "family": {"kind": "affine", "branches": [{"a": 1.1}]}})");
    const fs::path broken = dir.path() / "broken.json";
    write_file(broken, R"({"schema": "nonconf-ifs/1", "family": {"kind": "quad_conjugate"}, "bogus": true})");
    const std::string out = " --out " + (dir.path() / "out").string();

    EXPECT_EQ(run_binary("regularity --config " + good.string() + out), 0);
    EXPECT_EQ(run_binary("regularity --config " + nc.string() + out), 2);
    EXPECT_EQ(run_binary("bounds --config " + broken.string() + out), 2);
    EXPECT_EQ(run_binary("bounds --config " + (dir.path() / "missing.json").string() + out), 2);
    EXPECT_EQ(run_binary("frobnicate --config " + good.string()), 2);
    EXPECT_EQ(run_binary("regularity"), 2);
    EXPECT_EQ(run_binary("sweep --config " + good.string() + out), 2);
    EXPECT_EQ(run_binary("distortion --config " + good.string() + " --seed 3 --jobs 2" + out), 0);
    EXPECT_TRUE(fs::exists(dir.path() / "out" / "summary.txt"));
}
