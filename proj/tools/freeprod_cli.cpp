// Command-line front end: every subcommand loads an experiment spec, runs it,
// and writes a CSV report plus a JSON summary. Exit codes: 0 success, 2 spec
// error, 3 verification failure, 4 budget exhausted.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "freeprod/spec_io.hpp"

namespace {

struct CommonArgs {
    std::string spec_path;
    std::string out_dir;
    std::string seed;
    std::string mode;
    double tol = -1.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--spec", args.spec_path, "experiment spec file (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: $FREEPROD_OUT_DIR or .)");
    cmd->add_option("--seed", args.seed, "override the spec seed (u64)");
    cmd->add_option("--mode", args.mode, "override the coefficient mode: exact | float")
        ->check(CLI::IsMember({"exact", "float"}));
    cmd->add_option("--tol", args.tol, "override the numeric tolerance");
}

int run(const std::string& command, const CommonArgs& args) {
    std::ifstream in(args.spec_path);
    if (!in) {
        std::cerr << "cannot open spec file: " << args.spec_path << "\n";
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    freeprod::ExperimentSpec spec;
    try {
        spec = freeprod::parse_spec(buf.str());
    } catch (const freeprod::SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return 2;
    }
    if (spec.command != command) {
        std::cerr << "spec error: spec command '" << spec.command << "' does not match subcommand '"
                  << command << "'\n";
        return 2;
    }

    freeprod::RunOptions opt;
    if (!args.out_dir.empty()) {
        opt.out_dir = args.out_dir;
    } else if (const char* env = std::getenv("FREEPROD_OUT_DIR")) {
        opt.out_dir = env;
    }
    opt.mode_override = args.mode;
    opt.seed_override = args.seed;
    opt.tol_override = args.tol;

    freeprod::RunResult result = freeprod::run_experiment(spec, opt);
    for (const auto& f : result.files) std::cout << f << "\n";
    if (result.exit_code != 0 && result.summary.contains("error"))
        std::cerr << "error: " << result.summary["error"].get<std::string>() << "\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reduced free product engine"};
    app.require_subcommand(1);

    const std::vector<std::string> commands{"validate",       "mul",           "project",
                                            "bound",          "radius",        "certify",
                                            "avitzour-check", "four-point-scan", "window-scan"};
    std::map<std::string, CommonArgs> args;
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name, "run a '" + name + "' experiment spec");
        add_common(sub, args[name]);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& name : commands)
        if (app.got_subcommand(name)) return run(name, args[name]);
    return 2;
}
