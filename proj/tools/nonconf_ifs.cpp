#include <CLI11.hpp>

#include "nonconf/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Dimension bounds and distortion checks for non-conformal contracting semigroups", "nonconf-ifs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int jobs = 1;
    bool resume = false;

    const std::pair<const char*, const char*> commands[] = {
        {"regularity", "dilatation, contraction and regularity verdict"},
        {"bounds", "lower and upper Bowen roots along the period schedule"},
        {"distortion", "randomised ellipse-containment trials and angle report"},
        {"render", "limit-set or circle-preimage cloud as PGM and CSV"},
        {"sweep", "bounds over a parameter grid, one CSV row per point"},
    };
    for (const auto& [name, description] : commands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--resume", resume, "keep completed sweep rows");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : nonconf::kExitConfig;
    }
    CLI::App* sub = app.get_subcommands().front();
    nonconf::CommandOptions opt;
    opt.out_dir = out_dir;
    if (sub->count("--seed") > 0) opt.seed = seed;
    opt.jobs = jobs;
    opt.resume = resume;
    return nonconf::run_command(sub->get_name(), config_path, opt);
}
