#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "rectdim/experiment.hpp"

using namespace rectdim;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
    fs::path path;
    ScratchDir() {
        std::string t = (fs::temp_directory_path() / "rectdim-test-XXXXXX").string();
        REQUIRE(::mkdtemp(t.data()) != nullptr);
        path = t;
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

json fair_critdim() {
    return json::parse(R"({
        "experiment": "critdim",
        "metric": [{"kind": "linear", "param": 1}],
        "system": [{"depth": 64, "p": 0.5}],
        "n_range": {"min": 1, "max": 2000},
        "samples": 4,
        "tolerance": 0
    })");
}

json quarter_critdim() {
    return json::parse(R"({
        "experiment": "critdim",
        "metric": [{"kind": "linear", "param": 1}, {"kind": "power", "param": 2}],
        "system": [{"depth": 64, "p": 0.25}, {"depth": 64, "p": 0.1}],
        "n_range": {"min": 1, "max": 300},
        "samples": 6
    })");
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

int shell(const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("validate names the offending field") {
    CHECK(validate_config(fair_critdim()).empty());

    auto j = fair_critdim();
    j["system"][0]["p"] = 1.0;
    auto v = validate_config(j);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "system[0].p: coordinate measure must lie strictly inside (0,1)");

    j = fair_critdim();
    j["n_range"]["min"] = -2;
    v = validate_config(j);
    CHECK(mentions(v, "n_range.min"));

    j = fair_critdim();
    j["metric"][0] = {{"kind", "power"}, {"param", 0.5}};
    v = validate_config(j);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "metric[0]: power profile requires exponent >= 1");

    j = fair_critdim();
    j["experiment"] = "spectral";
    CHECK(mentions(validate_config(j), "experiment: unknown experiment 'spectral'"));

    j = fair_critdim();
    j["samples"] = 0;
    j["seed"] = 0;
    j["colour"] = "red";
    v = validate_config(j);
    CHECK(mentions(v, "samples: must be positive"));
    CHECK(mentions(v, "seed: must be positive"));
    CHECK(mentions(v, "colour: unknown field"));

    j = fair_critdim();
    j["system"].push_back({{"depth", 64}, {"p", 0.3}});
    CHECK(mentions(validate_config(j), "system: has 2 components"));

    j = fair_critdim();
    j["metric"][0] = {{"kind", "exp"}};
    j["n_range"]["max"] = 50;
    CHECK(mentions(validate_config(j), "n_range.max: profile value exceeds representable half-width"));

    CHECK(mentions(validate_config(json::array()), "config: must be a JSON object"));
    CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
}

TEST_CASE("experiment-specific requirements") {
    auto j = fair_critdim();
    j["experiment"] = "ergodic";
    CHECK(mentions(validate_config(j), "cylinder: required for ergodic"));
    j["cylinder"] = {"012"};
    CHECK(mentions(validate_config(j), "cylinder: cylinder patterns use digits 0 and 1"));
    j["cylinder"] = {"01"};
    CHECK(validate_config(j).empty());

    j = quarter_critdim();
    j["experiment"] = "stansym";
    CHECK(mentions(validate_config(j), "stansym needs a one-dimensional metric"));

    j = json::parse(R"({"experiment": "growth", "metric": [{"kind": "linear"}]})");
    CHECK(mentions(validate_config(j), "compare_metric: required"));
    j = json::parse(R"({"experiment": "covering", "metric": [{"kind": "linear"}], "carpet": {"points": 50, "span": 3}})");
    CHECK(mentions(validate_config(j), "carpet.points"));
}

TEST_CASE("resolved config round-trips") {
    const auto cfg = parse_config(quarter_critdim());
    const auto j = to_json(cfg);
    CHECK(validate_config(j).empty());
    CHECK(to_json(parse_config(j)) == j);
    CHECK(j["kernel"] == "enumerate");
    CHECK(j["system"][1]["p"] == 0.1);
    CHECK_FALSE(j.contains("workers"));
}

TEST_CASE("critdim with p = 0.5 reports exactly 1") {
    ScratchDir dir;
    const auto r = run_experiment(parse_config(fair_critdim()), dir.path);
    CHECK(r.pass);
    CHECK(r.summary["alpha_hat"] == 1.0);
    CHECK(r.summary["beta_hat"] == 1.0);
    CHECK(r.summary["predicted"] == 1.0);
    for (const char* name : {"config.json", "data.csv", "summary.json", "plot.dat", "plot.gp"}) {
        CHECK(fs::is_regular_file(dir.path / name));
    }
    const auto csv = slurp(dir.path / "data.csv");
    CHECK(csv.rfind("sample,n,log_card,log_sum,ratio\n", 0) == 0);
    CHECK(csv.find("0,1,1.09861228867,1.09861228867,1\n") != std::string::npos);
    const auto summary = json::parse(slurp(dir.path / "summary.json"));
    CHECK(summary["version"] == kToolVersion);
    CHECK(summary["seeds"].size() == 4);
}

TEST_CASE("prediction and estimate are separate fields") {
    ScratchDir dir;
    const auto r = run_experiment(parse_config(quarter_critdim()), dir.path);
    CHECK(r.summary.contains("gamma_hat"));
    CHECK(r.summary["predicted"].get<double>() == doctest::Approx(0.583090).epsilon(1e-6));
    CHECK(r.summary["gamma_hat"] != r.summary["predicted"]);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
    for (const char* experiment : {"critdim", "folner", "ergodic"}) {
        auto j = quarter_critdim();
        j["experiment"] = experiment;
        if (std::string(experiment) == "ergodic") j["cylinder"] = {"0", ""};
        auto cfg = parse_config(j);
        ScratchDir a, b, c;
        run_experiment(cfg, a.path);
        run_experiment(cfg, b.path);
        cfg.workers = 3;
        run_experiment(cfg, c.path);
        for (const char* name : {"data.csv", "plot.dat", "summary.json", "config.json"}) {
            CHECK(slurp(a.path / name) == slurp(b.path / name));
            CHECK(slurp(a.path / name) == slurp(c.path / name));
        }
    }
}

TEST_CASE("covering: 100 random carpets in d = 2 stay within 2^d") {
    const auto j = json::parse(R"({
        "experiment": "covering",
        "metric": [{"kind": "linear", "param": 1}, {"kind": "power", "param": 2}],
        "carpets": 100,
        "carpet": {"points": 60, "span": 30, "max_radius": 16}
    })");
    ScratchDir dir;
    const auto r = run_experiment(parse_config(j), dir.path);
    CHECK(r.pass);
    CHECK(r.summary["max_multiplicity"].get<std::size_t>() <= 4);
    CHECK(r.headline.rfind("max multiplicity ", 0) == 0);
    CHECK_FALSE(fs::exists(dir.path / "plot.dat"));
}

TEST_CASE("growth verdicts") {
    auto j = json::parse(R"({
        "experiment": "growth",
        "metric": [{"kind": "linear"}, {"kind": "linear"}],
        "compare_metric": [{"kind": "linear"}, {"kind": "exp"}],
        "n_range": {"min": 1, "max": 30}
    })");
    ScratchDir dir;
    auto r = run_experiment(parse_config(j), dir.path);
    CHECK(r.summary["verdict"] == "not comparable");
    CHECK(r.pass);
    j["expect"] = "comparable";
    r = run_experiment(parse_config(j), dir.path);
    CHECK_FALSE(r.pass);
    j["compare_metric"] = json::parse(R"([{"kind": "linear", "param": 2}, {"kind": "linear"}])");
    j["n_range"]["max"] = 400;
    r = run_experiment(parse_config(j), dir.path);
    CHECK(r.summary["verdict"] == "comparable");
}

TEST_CASE("reproduce: fresh, tampered, missing member, other version") {
    ScratchDir dir;
    run_experiment(parse_config(quarter_critdim()), dir.path);
    std::ostringstream log;
    CHECK(reproduce_bundle(dir.path, 2, log) == exit_code::ok);

    const auto original = slurp(dir.path / "data.csv");
    auto tampered = original;
    tampered[tampered.size() - 2] = tampered[tampered.size() - 2] == '1' ? '2' : '1';
    write_atomic(dir.path / "data.csv", tampered);
    CHECK(reproduce_bundle(dir.path, 1, log) == exit_code::mismatch);
    write_atomic(dir.path / "data.csv", original);

    auto summary = json::parse(slurp(dir.path / "summary.json"));
    summary["version"] = "0.0.1";
    write_atomic(dir.path / "summary.json", summary.dump(2));
    std::ostringstream report;
    CHECK(reproduce_bundle(dir.path, 1, report) == exit_code::mismatch);
    CHECK(report.str().find("version: bundle 0.0.1") != std::string::npos);

    fs::remove(dir.path / "config.json");
    CHECK(reproduce_bundle(dir.path, 1, log) == exit_code::io);
}

TEST_CASE("atomic write leaves no temporary behind") {
    ScratchDir dir;
    write_atomic(dir.path / "a.txt", "hello\n");
    CHECK(slurp(dir.path / "a.txt") == "hello\n");
    CHECK_FALSE(fs::exists(dir.path / "a.txt.tmp"));
    CHECK_THROWS_AS(write_atomic(dir.path / "missing" / "a.txt", "x"), IoError);
}

TEST_CASE("number format") {
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.0 / 3.0) == "0.666666666667");
    CHECK(format_number(1e-7) == "1e-07");
}

TEST_CASE("command-line exit codes") {
    const std::string cli = RECTDIM_CLI;
    ScratchDir dir;
    const auto write = [&](const char* name, const json& j) {
        write_atomic(dir.path / name, j.dump());
        return (dir.path / name).string();
    };
    const auto good = write("good.json", fair_critdim());
    auto bad_json = fair_critdim();
    bad_json["system"][0]["p"] = 1.0;
    const auto bad = write("bad.json", bad_json);
    auto strict = quarter_critdim();
    strict["tolerance"] = 0.0;
    const auto failing = write("strict.json", strict);
    const auto out = (dir.path / "out").string();

    CHECK(shell(cli + " validate --config " + good) == 0);
    CHECK(shell(cli + " validate --config " + bad) == 2);
    CHECK(shell(cli + " run --config " + bad + " --out " + out) == 2);
    CHECK(shell(cli + " run --config " + good) == 2);  // no output directory
    CHECK(shell(cli + " run --config " + good + " --out " + out + " --assert --workers 2") == 0);
    CHECK(shell(cli + " reproduce " + out) == 0);
    CHECK(shell(cli + " run --config " + failing + " --out " + out) == 0);
    CHECK(shell(cli + " run --config " + failing + " --out " + out + " --assert") == 3);
    CHECK(shell(cli + " run --config " + good + " --out /proc/no-such-dir") == 1);
    CHECK(shell(cli + " run --config " + (dir.path / "absent.json").string() + " --out " + out) == 1);
    CHECK(shell(cli + " run --config " + good + " --out " + out + " --seed 0") == 2);
    CHECK(shell(cli + " frobnicate") == 2);

    CHECK(shell(cli + " run --config " + good + " --out " + out + " --seed 7") == 0);
    CHECK(json::parse(slurp(dir.path / "out" / "config.json"))["seed"] == 7);
}
