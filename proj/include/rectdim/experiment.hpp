#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rectdim/covering.hpp"
#include "rectdim/estimator.hpp"

namespace rectdim {

#ifndef RECTDIM_VERSION
#define RECTDIM_VERSION "0.0.0"
#endif

inline constexpr const char* kToolVersion = RECTDIM_VERSION;
inline constexpr int kSchemaVersion = 1;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int io = 1;
inline constexpr int invalid = 2;
inline constexpr int assertion = 3;
inline constexpr int mismatch = 4;
}  // namespace exit_code

/// An artifact could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration failed validation; what() joins the violations.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
    std::string experiment;
    std::vector<Profile> metric;
    std::vector<Profile> compare_metric;  // growth: the second sequence
    std::vector<OdometerSystem> system;
    Index n_min = 1;
    Index n_max = 100;
    double growth = 1.25;  // radius grid factor; 1 visits every radius
    std::size_t samples = 20;
    std::uint64_t seed = 1;
    double tolerance = 0.05;
    unsigned workers = 1;
    std::string output;

    SumKernel kernel = SumKernel::enumerate;
    double tail_fraction = 0.5;
    std::vector<std::string> cylinder;  // ergodic, maximal
    Index thickness = 1;                // folner
    double threshold = 0.0;             // folner ceiling, growth constant C
    double pass_fraction = 0.0;         // share of samples that must pass
    std::vector<double> epsilons;       // maximal
    std::size_t carpets = 100;          // covering
    CarpetShape carpet;
    double burn_in = 0.25;  // growth
    std::string expect;     // growth: "comparable", "not comparable" or empty
};

/// Every problem with `config`, each prefixed by the offending field. Empty
/// iff parse_config succeeds.
std::vector<std::string> validate_config(const nlohmann::json& config);

/// Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& config);

/// Fully resolved form: every default filled in. `output` and `workers` are
/// left out so that the document does not depend on where or how it ran.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json read_json(const std::filesystem::path& path);

/// Writes `content` to `path` through a sibling temporary and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct RunResult {
    nlohmann::json summary;
    bool pass = true;
    std::string headline;  // one line for the terminal
};

/// Runs the experiment and writes config.json, data.csv, summary.json and,
/// for critdim / ergodic / folner, plot.dat and plot.gp into `out`.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out);

/// Reruns the bundle's config into a scratch directory and compares data.csv
/// (and plot.dat when present) byte for byte. Returns an exit code and writes
/// a report to `log`.
int reproduce_bundle(const std::filesystem::path& bundle, unsigned workers, std::ostream& log);

/// printf("%.12g").
std::string format_number(double v);

}  // namespace rectdim
