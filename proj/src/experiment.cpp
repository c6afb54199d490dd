#include "rectdim/experiment.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "rectdim/sampling.hpp"

namespace rectdim {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& s : lines) out += (out.empty() ? "" : "; ") + s;
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"critdim", "ergodic",  "folner", "maximal",
                                                   "covering", "growth", "stansym"};
    return names;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ================================================================ parsing

namespace {

struct Checker {
    std::vector<std::string> violations;
    void add(const std::string& field, const std::string& message) { violations.push_back(field + ": " + message); }
};

const json* member(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& path, Checker& c) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            c.add(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

template <class Int>
bool read_int(const json& obj, const char* key, Int& out, const std::string& path, Checker& c) {
    const json* v = member(obj, key);
    if (!v) return false;
    if (!v->is_number_integer()) {
        c.add(path, "must be an integer");
        return false;
    }
    if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
            out = v->get<Int>();
        } else if (v->get<std::int64_t>() < 0) {
            c.add(path, "must not be negative");
            return false;
        } else {
            out = static_cast<Int>(v->get<std::int64_t>());
        }
    } else {
        out = v->get<Int>();
    }
    return true;
}

bool read_number(const json& obj, const char* key, double& out, const std::string& path, Checker& c) {
    const json* v = member(obj, key);
    if (!v) return false;
    if (!v->is_number()) {
        c.add(path, "must be a number");
        return false;
    }
    out = v->get<double>();
    return true;
}

std::optional<Profile> parse_profile(const json& e, const std::string& path, Checker& c) {
    if (!e.is_object()) {
        c.add(path, "must be an object {\"kind\": ..., \"param\": ...}");
        return std::nullopt;
    }
    reject_unknown(e, {"kind", "param", "table"}, path, c);
    const json* kind = member(e, "kind");
    if (!kind || !kind->is_string()) {
        c.add(path + ".kind", "must be one of linear, power, exp, table");
        return std::nullopt;
    }
    const auto k = kind->get<std::string>();
    try {
        if (k == "linear") {
            double slope = 1.0;
            read_number(e, "param", slope, path + ".param", c);
            return Profile::linear(slope);
        }
        if (k == "power") {
            double exponent = 0.0;
            if (!read_number(e, "param", exponent, path + ".param", c)) {
                if (!member(e, "param")) c.add(path + ".param", "power profile needs an exponent");
                return std::nullopt;
            }
            return Profile::power(exponent);
        }
        if (k == "exp") return Profile::exponential();
        if (k == "table") {
            const json* t = member(e, "table");
            if (!t || !t->is_array()) {
                c.add(path + ".table", "must be an array of integers");
                return std::nullopt;
            }
            std::vector<Index> values;
            for (const auto& v : *t) {
                if (!v.is_number_integer()) {
                    c.add(path + ".table", "must be an array of integers");
                    return std::nullopt;
                }
                values.push_back(v.get<Index>());
            }
            return Profile::table(std::move(values));
        }
    } catch (const ArgumentError& err) {
        c.add(path, err.what());
        return std::nullopt;
    }
    c.add(path + ".kind", "unknown profile kind '" + k + "'");
    return std::nullopt;
}

std::vector<Profile> parse_metric(const json& root, const char* key, bool required, Checker& c) {
    const json* m = member(root, key);
    if (!m) {
        if (required) c.add(key, "required");
        return {};
    }
    if (!m->is_array() || m->empty()) {
        c.add(key, "must be a non-empty array of profiles");
        return {};
    }
    std::vector<Profile> out;
    bool ok = true;
    for (std::size_t i = 0; i < m->size(); ++i) {
        auto p = parse_profile((*m)[i], std::string(key) + "[" + std::to_string(i) + "]", c);
        if (p) {
            out.push_back(*p);
        } else {
            ok = false;
        }
    }
    if (!ok) return {};
    try {
        make_metric(out);
    } catch (const std::exception& err) {
        c.add(key, err.what());
        return {};
    }
    return out;
}

std::vector<OdometerSystem> parse_system(const json& root, bool required, Checker& c) {
    const json* s = member(root, "system");
    if (!s) {
        if (required) c.add("system", "required");
        return {};
    }
    if (!s->is_array() || (required && s->empty())) {
        c.add("system", "must be a non-empty array of {\"depth\": N, \"p\": ...}");
        return {};
    }
    std::vector<OdometerSystem> out;
    for (std::size_t i = 0; i < s->size(); ++i) {
        const std::string path = "system[" + std::to_string(i) + "]";
        const json& e = (*s)[i];
        if (!e.is_object()) {
            c.add(path, "must be an object");
            continue;
        }
        reject_unknown(e, {"depth", "p", "reversed"}, path, c);
        std::int64_t depth = 0;
        if (!read_int(e, "depth", depth, path + ".depth", c)) {
            if (!member(e, "depth")) c.add(path + ".depth", "required");
            continue;
        }
        if (depth < 1 || depth > 4096) {
            c.add(path + ".depth", "must lie in [1, 4096]");
            continue;
        }
        const json* p = member(e, "p");
        std::vector<double> probs;
        if (p && p->is_number()) {
            probs.assign(static_cast<std::size_t>(depth), p->get<double>());
        } else if (p && p->is_array() && p->size() == static_cast<std::size_t>(depth) &&
                   std::all_of(p->begin(), p->end(), [](const json& v) { return v.is_number(); })) {
            for (const auto& v : *p) probs.push_back(v.get<double>());
        } else {
            c.add(path + ".p", "must be a number or an array of `depth` numbers");
            continue;
        }
        bool reversed = false;
        if (const json* r = member(e, "reversed")) {
            if (!r->is_boolean()) {
                c.add(path + ".reversed", "must be true or false");
                continue;
            }
            reversed = r->get<bool>();
        }
        try {
            out.emplace_back(std::move(probs), reversed);
        } catch (const ArgumentError& err) {
            c.add(path + ".p", err.what());
        }
    }
    if (out.size() != s->size()) return {};
    return out;
}

bool needs_system(const std::string& e) { return e != "covering" && e != "growth"; }

ExperimentConfig build(const json& root, Checker& c) {
    ExperimentConfig cfg;
    if (!root.is_object()) {
        c.add("config", "must be a JSON object");
        return cfg;
    }
    reject_unknown(root,
                   {"experiment", "metric", "compare_metric", "system", "n_range", "samples", "seed", "tolerance",
                    "workers", "output", "kernel", "tail_fraction", "cylinder", "thickness", "threshold",
                    "pass_fraction", "epsilons", "carpets", "carpet", "burn_in", "expect"},
                   "", c);

    const json* e = member(root, "experiment");
    const auto& names = experiment_names();
    if (!e || !e->is_string()) {
        c.add("experiment", "required, one of critdim, ergodic, folner, maximal, covering, growth, stansym");
    } else if (std::find(names.begin(), names.end(), e->get<std::string>()) == names.end()) {
        c.add("experiment", "unknown experiment '" + e->get<std::string>() + "'");
    } else {
        cfg.experiment = e->get<std::string>();
    }
    const std::string& x = cfg.experiment;

    cfg.metric = parse_metric(root, "metric", true, c);
    cfg.compare_metric = parse_metric(root, "compare_metric", x == "growth", c);
    cfg.system = parse_system(root, needs_system(x), c);
    const std::size_t d = cfg.metric.size();
    if (d && !cfg.system.empty() && cfg.system.size() != d) {
        c.add("system", "has " + std::to_string(cfg.system.size()) + " components but the metric has dimension " +
                            std::to_string(d));
    }
    if (d && !cfg.compare_metric.empty() && cfg.compare_metric.size() != d) {
        c.add("compare_metric", "dimension differs from metric");
    }
    if (x == "stansym" && d && d != 1) c.add("metric", "stansym needs a one-dimensional metric");

    if (const json* r = member(root, "n_range")) {
        if (!r->is_object()) {
            c.add("n_range", "must be an object {\"min\": a, \"max\": b, \"growth\": g}");
        } else {
            reject_unknown(*r, {"min", "max", "growth"}, "n_range", c);
            read_int(*r, "min", cfg.n_min, "n_range.min", c);
            read_int(*r, "max", cfg.n_max, "n_range.max", c);
            read_number(*r, "growth", cfg.growth, "n_range.growth", c);
        }
    }
    if (cfg.n_min < 1) c.add("n_range.min", "radius range must be positive");
    if (cfg.n_max < cfg.n_min) c.add("n_range.max", "must be at least n_range.min");
    if (!(cfg.growth >= 1.0 && std::isfinite(cfg.growth))) c.add("n_range.growth", "must be >= 1");
    for (const auto* m : {&cfg.metric, &cfg.compare_metric}) {
        if (m->empty() || cfg.n_max < 1) continue;
        try {
            make_metric(*m)->halfwidths(cfg.n_max);
        } catch (const RangeError& err) {
            c.add("n_range.max", err.what());
        }
    }

    if (read_int(root, "samples", cfg.samples, "samples", c) && cfg.samples < 1) c.add("samples", "must be positive");
    if (read_int(root, "seed", cfg.seed, "seed", c) && cfg.seed < 1) c.add("seed", "must be positive");
    if (read_int(root, "workers", cfg.workers, "workers", c) && cfg.workers < 1) c.add("workers", "must be positive");
    if (read_number(root, "tolerance", cfg.tolerance, "tolerance", c) && !(cfg.tolerance >= 0.0)) {
        c.add("tolerance", "must not be negative");
    }
    if (const json* o = member(root, "output")) {
        if (o->is_string()) {
            cfg.output = o->get<std::string>();
        } else {
            c.add("output", "must be a path string");
        }
    }
    if (const json* k = member(root, "kernel")) {
        if (*k == "enumerate") {
            cfg.kernel = SumKernel::enumerate;
        } else if (*k == "dyadic") {
            cfg.kernel = SumKernel::dyadic;
        } else {
            c.add("kernel", "must be \"enumerate\" or \"dyadic\"");
        }
    }
    if (read_number(root, "tail_fraction", cfg.tail_fraction, "tail_fraction", c) &&
        !(cfg.tail_fraction > 0.0 && cfg.tail_fraction <= 1.0)) {
        c.add("tail_fraction", "must lie in (0, 1]");
    }

    if (const json* cyl = member(root, "cylinder")) {
        if (!cyl->is_array() || !std::all_of(cyl->begin(), cyl->end(), [](const json& v) { return v.is_string(); })) {
            c.add("cylinder", "must be an array of digit strings, one per component");
        } else {
            for (const auto& v : *cyl) cfg.cylinder.push_back(v.get<std::string>());
            if (!cfg.system.empty()) {
                try {
                    CylinderFunction(ProductSystem(cfg.system), cfg.cylinder);
                } catch (const ArgumentError& err) {
                    c.add("cylinder", err.what());
                }
            }
        }
    } else if (x == "ergodic" || x == "maximal") {
        c.add("cylinder", "required for " + x);
    }

    if (read_int(root, "thickness", cfg.thickness, "thickness", c) && cfg.thickness < 0) {
        c.add("thickness", "must not be negative");
    }
    cfg.threshold = x == "growth" ? 1.0 / 16.0 : 0.1;
    if (read_number(root, "threshold", cfg.threshold, "threshold", c) && !(cfg.threshold > 0.0)) {
        c.add("threshold", "must be positive");
    }
    if (x == "growth" && cfg.threshold > 1.0) c.add("threshold", "growth constant must lie in (0, 1]");
    cfg.pass_fraction = x == "folner" ? 0.9 : 0.8;
    if (read_number(root, "pass_fraction", cfg.pass_fraction, "pass_fraction", c) &&
        !(cfg.pass_fraction >= 0.0 && cfg.pass_fraction <= 1.0)) {
        c.add("pass_fraction", "must lie in [0, 1]");
    }

    cfg.epsilons = {0.05, 0.1, 0.5};
    if (const json* eps = member(root, "epsilons")) {
        if (!eps->is_array() || eps->empty() ||
            !std::all_of(eps->begin(), eps->end(), [](const json& v) { return v.is_number() && v.get<double>() > 0; })) {
            c.add("epsilons", "must be a non-empty array of positive numbers");
        } else {
            cfg.epsilons.clear();
            for (const auto& v : *eps) cfg.epsilons.push_back(v.get<double>());
        }
    }

    if (read_int(root, "carpets", cfg.carpets, "carpets", c) && cfg.carpets < 1) c.add("carpets", "must be positive");
    if (const json* cp = member(root, "carpet")) {
        if (!cp->is_object()) {
            c.add("carpet", "must be an object {\"points\", \"span\", \"max_radius\"}");
        } else {
            reject_unknown(*cp, {"points", "span", "max_radius"}, "carpet", c);
            read_int(*cp, "points", cfg.carpet.points, "carpet.points", c);
            read_int(*cp, "span", cfg.carpet.span, "carpet.span", c);
            read_int(*cp, "max_radius", cfg.carpet.max_radius, "carpet.max_radius", c);
        }
    }
    if (cfg.carpet.points < 1) c.add("carpet.points", "must be positive");
    if (cfg.carpet.span < 0) c.add("carpet.span", "must not be negative");
    if (cfg.carpet.max_radius < 0) c.add("carpet.max_radius", "must not be negative");
    if (x == "covering" && d && cfg.carpet.span >= 0) {
        double lattice = std::pow(2.0 * static_cast<double>(cfg.carpet.span) + 1.0, static_cast<double>(d));
        if (lattice < static_cast<double>(cfg.carpet.points)) {
            c.add("carpet.points", "exceeds the number of lattice points in [-span, span]^d");
        }
    }

    if (read_number(root, "burn_in", cfg.burn_in, "burn_in", c) && !(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0)) {
        c.add("burn_in", "must lie in [0, 1)");
    }
    if (const json* ex = member(root, "expect")) {
        if (*ex == "comparable" || *ex == "not comparable") {
            cfg.expect = ex->get<std::string>();
        } else {
            c.add("expect", "must be \"comparable\" or \"not comparable\"");
        }
    }
    return cfg;
}

json profile_json(const Profile& p) {
    switch (p.kind()) {
        case ProfileKind::linear:
            return {{"kind", "linear"}, {"param", p.param()}};
        case ProfileKind::power:
            return {{"kind", "power"}, {"param", p.param()}};
        case ProfileKind::exponential:
            return {{"kind", "exp"}};
        case ProfileKind::table:
            return {{"kind", "table"}, {"table", std::vector<Index>(p.values().begin(), p.values().end())}};
    }
    return {};
}

json metric_json(const std::vector<Profile>& m) {
    json out = json::array();
    for (const auto& p : m) out.push_back(profile_json(p));
    return out;
}

}  // namespace

std::vector<std::string> validate_config(const json& config) {
    Checker c;
    build(config, c);
    return c.violations;
}

ExperimentConfig parse_config(const json& config) {
    Checker c;
    auto cfg = build(config, c);
    if (!c.violations.empty()) throw ConfigError(std::move(c.violations));
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["metric"] = metric_json(cfg.metric);
    if (!cfg.compare_metric.empty()) j["compare_metric"] = metric_json(cfg.compare_metric);
    if (!cfg.system.empty()) {
        json sys = json::array();
        for (const auto& s : cfg.system) {
            const auto& p = s.zero_probabilities();
            const bool constant = std::all_of(p.begin(), p.end(), [&](double v) { return v == p.front(); });
            sys.push_back({{"depth", s.depth()},
                           {"p", constant ? json(p.front()) : json(p)},
                           {"reversed", s.reversed()}});
        }
        j["system"] = sys;
    }
    j["n_range"] = {{"min", cfg.n_min}, {"max", cfg.n_max}, {"growth", cfg.growth}};
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    j["tolerance"] = cfg.tolerance;
    j["kernel"] = cfg.kernel == SumKernel::dyadic ? "dyadic" : "enumerate";
    j["tail_fraction"] = cfg.tail_fraction;
    if (!cfg.cylinder.empty()) j["cylinder"] = cfg.cylinder;
    j["thickness"] = cfg.thickness;
    j["threshold"] = cfg.threshold;
    j["pass_fraction"] = cfg.pass_fraction;
    j["epsilons"] = cfg.epsilons;
    j["carpets"] = cfg.carpets;
    j["carpet"] = {{"points", cfg.carpet.points}, {"span", cfg.carpet.span}, {"max_radius", cfg.carpet.max_radius}};
    j["burn_in"] = cfg.burn_in;
    if (!cfg.expect.empty()) j["expect"] = cfg.expect;
    return j;
}

// ==================================================================== I/O

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError({path.filename().string() + ": " + err.what()});
    }
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

// ============================================================ experiments

namespace {

struct Artifacts {
    std::string csv;
    std::string plot;  // empty: no plot
    std::string plot_script;
};

std::string fmt(double v) { return format_number(v); }

json common_summary(const ExperimentConfig& cfg) {
    return {{"tool", "rectdim"},
            {"version", kToolVersion},
            {"schema", kSchemaVersion},
            {"experiment", cfg.experiment},
            {"seed", cfg.seed}};
}

std::string plot_script(const std::string& xlabel, const std::string& ylabel, std::optional<double> reference) {
    std::string s = "# gnuplot plot.gp\nset terminal pngcairo size 800,500\nset output 'plot.png'\n";
    s += "set xlabel '" + xlabel + "'\nset ylabel '" + ylabel + "'\n";
    s += "plot 'plot.dat' using 1:2 with linespoints title 'median'";
    if (reference) s += ", " + fmt(*reference) + " with lines title 'predicted'";
    return s + "\n";
}

std::vector<double> column_medians(const std::vector<std::vector<double>>& rows, std::size_t width) {
    std::vector<double> out(width);
    for (std::size_t k = 0; k < width; ++k) {
        std::vector<double> col;
        for (const auto& r : rows) col.push_back(r[k]);
        out[k] = median(col);
    }
    return out;
}

std::vector<Index> grid(const ExperimentConfig& cfg) { return radius_grid(cfg.n_min, cfg.n_max, cfg.growth); }

RunResult run_critdim(const ExperimentConfig& cfg, Artifacts& art) {
    const ProductSystem sys(cfg.system);
    const auto metric = make_metric(cfg.metric);
    EstimatorOptions opt;
    opt.radii = grid(cfg);
    opt.tail_fraction = cfg.tail_fraction;
    opt.samples = cfg.samples;
    opt.seed = cfg.seed;
    opt.kernel = cfg.kernel;
    opt.workers = cfg.workers;
    const auto est = critical_dimensions(sys, *metric, opt);
    const auto predicted = predicted_dimension(sys, *metric);

    art.csv = "sample,n,log_card,log_sum,ratio\n";
    std::vector<std::vector<double>> ratios;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < est.samples.size(); ++i) {
        const auto& s = est.samples[i];
        seeds.push_back(s.seed);
        ratios.emplace_back();
        for (const auto& p : s.series.points) {
            art.csv += std::to_string(i) + "," + std::to_string(p.n) + "," + fmt(p.log_card) + "," + fmt(p.log_sum) +
                       "," + fmt(p.ratio) + "\n";
            ratios.back().push_back(p.ratio);
        }
    }
    const auto med = column_medians(ratios, opt.radii.size());
    art.plot = "# log|B_n| median_ratio\n";
    const auto& pts = est.samples.front().series.points;
    for (std::size_t k = 0; k < pts.size(); ++k) art.plot += fmt(pts[k].log_card) + " " + fmt(med[k]) + "\n";
    art.plot_script = plot_script("log |B_n|", "log sum / log |B_n|", predicted);

    RunResult r;
    r.summary = common_summary(cfg);
    r.summary["alpha_hat"] = est.alpha_hat;
    r.summary["beta_hat"] = est.beta_hat;
    r.summary["gamma_hat"] = est.gamma_hat;
    r.summary["predicted"] = predicted ? json(*predicted) : json(nullptr);
    r.summary["tail_start"] = est.tail_start;
    r.summary["samples"] = est.samples.size();
    r.summary["seeds"] = seeds;
    r.summary["discards"] = est.discards;
    r.pass = !predicted || std::abs(est.gamma_hat - *predicted) <= cfg.tolerance;
    r.summary["check"] = {{"rule", "|gamma_hat - predicted| <= tolerance"}, {"pass", r.pass}};
    r.headline = "alpha_hat=" + fmt(est.alpha_hat) + " beta_hat=" + fmt(est.beta_hat) +
                 " gamma_hat=" + fmt(est.gamma_hat) + " predicted=" + (predicted ? fmt(*predicted) : "none");
    return r;
}

struct SeriesRun {
    std::vector<std::vector<double>> values;
    std::vector<std::uint64_t> seeds;
    std::size_t discards = 0;
};

template <class Fn>
SeriesRun sample_series(const ExperimentConfig& cfg, Fn&& fn) {
    auto batch = run_samples<std::vector<double>>(cfg.samples, cfg.seed, cfg.workers, fn);
    return {std::move(batch.results), std::move(batch.seeds), batch.discards};
}

std::string series_csv(const char* column, const std::vector<Index>& radii, const SeriesRun& run) {
    std::string csv = std::string("sample,n,") + column + "\n";
    for (std::size_t i = 0; i < run.values.size(); ++i) {
        for (std::size_t k = 0; k < radii.size(); ++k) {
            csv += std::to_string(i) + "," + std::to_string(radii[k]) + "," + fmt(run.values[i][k]) + "\n";
        }
    }
    return csv;
}

std::string series_plot(const char* column, const std::vector<Index>& radii, const std::vector<double>& med) {
    std::string plot = std::string("# n median_") + column + "\n";
    for (std::size_t k = 0; k < radii.size(); ++k) plot += std::to_string(radii[k]) + " " + fmt(med[k]) + "\n";
    return plot;
}

RunResult run_ergodic(const ExperimentConfig& cfg, Artifacts& art) {
    const ProductSystem sys(cfg.system);
    const auto metric = make_metric(cfg.metric);
    const CylinderFunction phi(sys, cfg.cylinder);
    const auto radii = grid(cfg);
    const auto run = sample_series(cfg, [&](std::uint64_t seed) {
        return ratio_average_series(sys, sys.sample(seed), *metric, radii, phi, cfg.kernel);
    });
    const auto med = column_medians(run.values, radii.size());
    std::size_t within = 0;
    for (const auto& v : run.values) within += std::abs(v.back() - phi.integral()) < cfg.tolerance;
    const double share = static_cast<double>(within) / static_cast<double>(run.values.size());

    art.csv = series_csv("average", radii, run);
    art.plot = series_plot("average", radii, med);
    art.plot_script = plot_script("n", "R_n phi", phi.integral());

    RunResult r;
    r.summary = common_summary(cfg);
    r.summary["integral"] = phi.integral();
    r.summary["median_average_at_n_max"] = med.back();
    r.summary["share_within_tolerance"] = share;
    r.summary["samples"] = run.values.size();
    r.summary["seeds"] = run.seeds;
    r.summary["discards"] = run.discards;
    r.pass = share >= cfg.pass_fraction;
    r.summary["check"] = {{"rule", "share of samples with |R_n_max phi - integral| < tolerance >= pass_fraction"},
                          {"pass", r.pass}};
    r.headline = "integral=" + fmt(phi.integral()) + " median R=" + fmt(med.back()) + " share within=" + fmt(share);
    return r;
}

RunResult run_folner(const ExperimentConfig& cfg, Artifacts& art) {
    const ProductSystem sys(cfg.system);
    const auto metric = make_metric(cfg.metric);
    const auto radii = grid(cfg);
    const auto run = sample_series(cfg, [&](std::uint64_t seed) {
        const auto x = sys.sample(seed);
        std::vector<double> v;
        for (Index n : radii) v.push_back(folner_ratio(sys, x, *metric, n, cfg.thickness, cfg.kernel));
        return v;
    });
    const auto med = column_medians(run.values, radii.size());
    std::size_t decayed = 0;
    for (const auto& v : run.values) decayed += v.back() < cfg.threshold && v.back() < v.front();
    const double share = static_cast<double>(decayed) / static_cast<double>(run.values.size());

    art.csv = series_csv("folner_ratio", radii, run);
    art.plot = series_plot("folner_ratio", radii, med);
    art.plot_script = plot_script("n", "boundary share", std::nullopt);

    RunResult r;
    r.summary = common_summary(cfg);
    r.summary["thickness"] = cfg.thickness;
    r.summary["median_ratio_at_n_min"] = med.front();
    r.summary["median_ratio_at_n_max"] = med.back();
    r.summary["share_decayed"] = share;
    r.summary["samples"] = run.values.size();
    r.summary["seeds"] = run.seeds;
    r.summary["discards"] = run.discards;
    r.pass = share >= cfg.pass_fraction;
    r.summary["check"] = {
        {"rule", "share of samples with ratio(n_max) < threshold and ratio(n_max) < ratio(n_min) >= pass_fraction"},
        {"pass", r.pass}};
    r.headline = "median ratio " + fmt(med.front()) + " -> " + fmt(med.back()) + ", share decayed=" + fmt(share);
    return r;
}

RunResult run_maximal(const ExperimentConfig& cfg, Artifacts& art) {
    const ProductSystem sys(cfg.system);
    const auto metric = make_metric(cfg.metric);
    const CylinderFunction phi(sys, cfg.cylinder);
    const auto reports =
        maximal_tail_check(sys, *metric, phi, cfg.epsilons, cfg.n_max, cfg.samples, cfg.seed, cfg.workers);
    art.csv = "epsilon,samples,exceed,fraction,bound,pass\n";
    RunResult r;
    r.summary = common_summary(cfg);
    json rows = json::array();
    std::size_t discards = 0;
    for (const auto& m : reports) {
        art.csv += fmt(m.epsilon) + "," + std::to_string(m.samples) + "," + std::to_string(m.exceed) + "," +
                   fmt(m.fraction) + "," + fmt(m.bound) + "," + (m.pass ? "1" : "0") + "\n";
        rows.push_back({{"epsilon", m.epsilon}, {"fraction", m.fraction}, {"bound", m.bound}, {"pass", m.pass}});
        r.pass = r.pass && m.pass;
        discards = m.discards;
    }
    r.summary["integral"] = phi.integral();
    r.summary["n_max"] = cfg.n_max;
    r.summary["samples"] = cfg.samples;
    r.summary["epsilons"] = rows;
    r.summary["discards"] = discards;
    r.summary["check"] = {{"rule", "tail fraction <= 4^d integral / epsilon for every epsilon"}, {"pass", r.pass}};
    r.headline = std::string("maximal inequality ") + (r.pass ? "holds" : "violated") + " on " +
                 std::to_string(reports.size()) + " thresholds";
    return r;
}

struct CarpetRow {
    std::size_t points = 0, selected = 0, multiplicity = 0, classes = 0;
    bool covers = false, separated = false;
    double covered = 0.0, total = 0.0;
};

RunResult run_covering(const ExperimentConfig& cfg, Artifacts& art) {
    const auto metric = make_metric(cfg.metric);
    const std::size_t d = metric->dimension();
    auto batch = run_samples<CarpetRow>(cfg.carpets, cfg.seed, cfg.workers, [&](std::uint64_t seed) {
        const auto carpet = random_carpet(metric, cfg.carpet, seed);
        CarpetRow row;
        row.points = carpet.size();
        const auto sub = incremental_subcarpet(carpet);
        const auto balls = carpet.balls(sub);
        row.selected = sub.size();
        row.multiplicity = multiplicity(balls);
        row.covers = std::all_of(carpet.points().begin(), carpet.points().end(), [&](const Point& z) {
            return std::any_of(balls.begin(), balls.end(), [&](const Rectangle& b) { return b.contains(z); });
        });
        const auto col = well_separated_coloring(carpet);
        row.classes = col.classes.size();
        row.separated = std::all_of(col.classes.begin(), col.classes.end(),
                                    [&](const auto& cls) { return is_well_separated(carpet.balls(cls)); });
        const auto sel = mass_cover_selection(carpet, DiscreteMassFunction::uniform(carpet.points()));
        row.covered = sel.covered;
        row.total = sel.total;
        return row;
    });

    const std::size_t mult_bound = std::size_t{1} << d;
    const std::size_t class_bound = coloring_bound(d);
    art.csv = "carpet,points,selected,multiplicity,covers,classes,separated,covered,total\n";
    std::size_t max_mult = 0, max_classes = 0;
    double min_share = 1.0;
    bool ok = true;
    for (std::size_t i = 0; i < batch.results.size(); ++i) {
        const auto& row = batch.results[i];
        art.csv += std::to_string(i) + "," + std::to_string(row.points) + "," + std::to_string(row.selected) + "," +
                   std::to_string(row.multiplicity) + "," + (row.covers ? "1" : "0") + "," +
                   std::to_string(row.classes) + "," + (row.separated ? "1" : "0") + "," + fmt(row.covered) + "," +
                   fmt(row.total) + "\n";
        max_mult = std::max(max_mult, row.multiplicity);
        max_classes = std::max(max_classes, row.classes);
        const double share = row.covered / row.total;
        min_share = std::min(min_share, share);
        ok = ok && row.covers && row.separated && row.multiplicity <= mult_bound && row.classes <= class_bound &&
             row.covered * static_cast<double>(class_bound) >= row.total;
    }
    RunResult r;
    r.summary = common_summary(cfg);
    r.summary["carpets"] = cfg.carpets;
    r.summary["max_multiplicity"] = max_mult;
    r.summary["multiplicity_bound"] = mult_bound;
    r.summary["max_classes"] = max_classes;
    r.summary["class_bound"] = class_bound;
    r.summary["min_mass_share"] = min_share;
    r.summary["mass_share_bound"] = 1.0 / static_cast<double>(class_bound);
    r.summary["seeds"] = batch.seeds;
    r.pass = ok;
    r.summary["check"] = {{"rule", "cover, multiplicity <= 2^d, classes <= 2^(3d)+1 and well separated, "
                                   "mass share >= 1/(2^(3d)+1), on every carpet"},
                          {"pass", r.pass}};
    r.headline = "max multiplicity " + std::to_string(max_mult) + " (bound " + std::to_string(mult_bound) +
                 "), max classes " + std::to_string(max_classes) + " (bound " + std::to_string(class_bound) + ")";
    return r;
}

RunResult run_growth(const ExperimentConfig& cfg, Artifacts& art) {
    const auto a = make_metric(cfg.metric);
    const auto b = make_metric(cfg.compare_metric);
    const auto rep = compare_growth(*a, *b, cfg.n_min, cfg.n_max, cfg.threshold, cfg.burn_in);
    art.csv = "n,m,m_prime,ratio,ratio_prime\n";
    for (const auto& row : rep.rows) {
        art.csv += std::to_string(row.n) + "," + std::to_string(row.m) + "," + std::to_string(row.m_prime) + "," +
                   fmt(row.ratio) + "," + fmt(row.ratio_prime) + "\n";
    }
    const std::string verdict = rep.comparable ? "comparable" : "not comparable";
    RunResult r;
    r.summary = common_summary(cfg);
    r.summary["verdict"] = verdict;
    r.summary["threshold"] = rep.threshold;
    r.summary["burn_in_n"] = rep.burn_in;
    r.summary["expected_verdict"] = cfg.expect.empty() ? json(nullptr) : json(cfg.expect);
    r.pass = cfg.expect.empty() || cfg.expect == verdict;
    r.summary["check"] = {{"rule", "verdict == expect (when given)"}, {"pass", r.pass}};
    r.headline = "verdict: " + verdict;
    return r;
}

RunResult run_stansym(const ExperimentConfig& cfg, Artifacts& art) {
    const auto metric = make_metric(cfg.metric);
    const auto rep = stansym_check(cfg.system.front(), *metric, grid(cfg), cfg.tail_fraction, cfg.samples, cfg.seed,
                                   cfg.tolerance, cfg.kernel, cfg.workers);
    art.csv = "sample,alpha_plus,beta_plus,alpha_minus,beta_minus,alpha,beta\n";
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        const auto& s = rep.samples[i];
        seeds.push_back(s.seed);
        art.csv += std::to_string(i) + "," + fmt(s.alpha_plus) + "," + fmt(s.beta_plus) + "," + fmt(s.alpha_minus) +
                   "," + fmt(s.beta_minus) + "," + fmt(s.alpha) + "," + fmt(s.beta) + "\n";
    }
    const auto& m = rep.median;
    RunResult r;
    r.summary = common_summary(cfg);
    r.summary["median"] = {{"alpha_plus", m.alpha_plus}, {"beta_plus", m.beta_plus}, {"alpha_minus", m.alpha_minus},
                           {"beta_minus", m.beta_minus}, {"alpha", m.alpha},         {"beta", m.beta}};
    r.summary["sandwich"] = rep.sandwich;
    r.summary["tight"] = rep.tight;
    r.summary["symmetric"] = rep.symmetric;
    r.summary["seeds"] = seeds;
    r.summary["discards"] = rep.discards;
    r.pass = rep.pass();
    r.summary["check"] = {{"rule", "sandwich, |alpha - max(alpha+, alpha-)| <= tol and |alpha+ - alpha-| <= tol"},
                          {"pass", r.pass}};
    r.headline = "alpha=" + fmt(m.alpha) + " alpha+=" + fmt(m.alpha_plus) + " alpha-=" + fmt(m.alpha_minus) +
                 " beta=" + fmt(m.beta);
    return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());

    Artifacts art;
    RunResult r;
    const auto& x = cfg.experiment;
    if (x == "critdim") {
        r = run_critdim(cfg, art);
    } else if (x == "ergodic") {
        r = run_ergodic(cfg, art);
    } else if (x == "folner") {
        r = run_folner(cfg, art);
    } else if (x == "maximal") {
        r = run_maximal(cfg, art);
    } else if (x == "covering") {
        r = run_covering(cfg, art);
    } else if (x == "growth") {
        r = run_growth(cfg, art);
    } else if (x == "stansym") {
        r = run_stansym(cfg, art);
    } else {
        throw ConfigError({"experiment: unknown experiment '" + x + "'"});
    }

    write_atomic(out / "config.json", to_json(cfg).dump(2) + "\n");
    write_atomic(out / "data.csv", art.csv);
    if (!art.plot.empty()) {
        write_atomic(out / "plot.dat", art.plot);
        write_atomic(out / "plot.gp", art.plot_script);
    }
    write_atomic(out / "summary.json", r.summary.dump(2) + "\n");
    return r;
}

// ============================================================== reproduce

namespace {

std::optional<std::string> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::size_t first_differing_line(const std::string& a, const std::string& b) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] != b[i]) return line;
        line += a[i] == '\n';
    }
    return line;
}

}  // namespace

int reproduce_bundle(const fs::path& bundle, unsigned workers, std::ostream& log) {
    for (const char* name : {"config.json", "summary.json", "data.csv"}) {
        if (!fs::is_regular_file(bundle / name)) {
            log << "missing bundle member: " << name << "\n";
            return exit_code::io;
        }
    }
    ExperimentConfig cfg;
    json old_summary;
    try {
        cfg = parse_config(read_json(bundle / "config.json"));
        old_summary = read_json(bundle / "summary.json");
    } catch (const ConfigError& err) {
        log << "invalid bundle: " << err.what() << "\n";
        return exit_code::invalid;
    }
    if (old_summary.value("schema", -1) != kSchemaVersion) {
        log << "schema mismatch: bundle " << old_summary.value("schema", -1) << ", tool " << kSchemaVersion << "\n";
        return exit_code::mismatch;
    }
    cfg.workers = workers;

    std::string scratch_template = (fs::temp_directory_path() / "rectdim-reproduce-XXXXXX").string();
    if (!::mkdtemp(scratch_template.data())) throw IoError("cannot create a scratch directory");
    const fs::path scratch = scratch_template;

    int status = exit_code::ok;
    try {
        const auto fresh = run_experiment(cfg, scratch);
        for (const char* name : {"data.csv", "plot.dat"}) {
            const auto before = slurp(bundle / name);
            const auto after = slurp(scratch / name);
            if (!before && !after) continue;
            if (!before || !after) {
                log << name << ": present in only one of bundle and rerun\n";
                status = exit_code::mismatch;
            } else if (*before != *after) {
                log << name << ": differs from line " << first_differing_line(*before, *after) << "\n";
                status = exit_code::mismatch;
            } else {
                log << name << ": identical\n";
            }
        }
        if (old_summary.contains("seeds") && old_summary["seeds"] != fresh.summary["seeds"]) {
            log << "seeds: differ from the recorded seed set\n";
            status = exit_code::mismatch;
        }
        const std::string old_version = old_summary.value("version", "unknown");
        if (old_version != kToolVersion) {
            log << "version: bundle " << old_version << ", tool " << kToolVersion << " (same schema)\n";
            status = exit_code::mismatch;
        }
    } catch (...) {
        std::error_code ec;
        fs::remove_all(scratch, ec);
        throw;
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    log << (status == exit_code::ok ? "reproduced" : "not reproduced") << "\n";
    return status;
}

}  // namespace rectdim
