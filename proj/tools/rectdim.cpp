// rectdim: batch driver for the critical-dimension experiments.
//
//   rectdim run --config exp.json --out results/ [--assert] [--seed N] [--workers K]
//   rectdim validate --config exp.json
//   rectdim reproduce results/ [--workers K]
//
// Exit status: 0 ok, 1 I/O or runtime error, 2 invalid configuration,
// 3 check failed under --assert, 4 bundle not reproduced.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "rectdim/experiment.hpp"

using namespace rectdim;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string bundle;
    bool assert_checks = false;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
};

int load(const Options& opt, nlohmann::json& j) {
    try {
        j = read_json(opt.config);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::invalid;
    }
    if (opt.seed && j.is_object()) j["seed"] = *opt.seed;
    if (opt.workers && j.is_object()) j["workers"] = *opt.workers;
    const auto violations = validate_config(j);
    for (const auto& v : violations) std::cerr << "invalid: " << v << "\n";
    return violations.empty() ? exit_code::ok : exit_code::invalid;
}

int cmd_validate(const Options& opt) {
    nlohmann::json j;
    const int rc = load(opt, j);
    if (rc == exit_code::ok) std::cout << opt.config << ": ok\n";
    return rc;
}

int cmd_run(const Options& opt) {
    nlohmann::json j;
    if (const int rc = load(opt, j); rc != exit_code::ok) return rc;
    const auto cfg = parse_config(j);
    const std::string out = opt.out.empty() ? cfg.output : opt.out;
    if (out.empty()) {
        std::cerr << "invalid: output: no output directory (set \"output\" or pass --out)\n";
        return exit_code::invalid;
    }
    RunResult r;
    try {
        r = run_experiment(cfg, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    }
    std::cout << cfg.experiment << ": " << r.headline << "\n";
    std::cout << "check " << (r.pass ? "passed" : "failed") << ": " << r.summary["check"]["rule"].get<std::string>()
              << "\n";
    std::cout << "wrote " << out << "\n";
    return opt.assert_checks && !r.pass ? exit_code::assertion : exit_code::ok;
}

int cmd_reproduce(const Options& opt) {
    try {
        return reproduce_bundle(opt.bundle, opt.workers.value_or(1), std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical dimensions of odometer actions on rectangular metrics"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    Options opt;

    auto* run = app.add_subcommand("run", "run an experiment and write its artifacts");
    run->add_option("--config", opt.config, "experiment configuration (JSON)")->required();
    run->add_option("--out", opt.out, "output directory (overrides \"output\")");
    run->add_flag("--assert", opt.assert_checks, "exit 3 when the experiment's check fails");
    run->add_option("--seed", opt.seed, "override the base seed");
    run->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "list configuration problems");
    validate->add_option("--config", opt.config, "experiment configuration (JSON)")->required();

    auto* reproduce = app.add_subcommand("reproduce", "rerun a result bundle and compare outputs byte for byte");
    reproduce->add_option("bundle", opt.bundle, "directory written by `run`")->required();
    reproduce->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::invalid;
    }
    if (*run) return cmd_run(opt);
    if (*validate) return cmd_validate(opt);
    return cmd_reproduce(opt);
}
