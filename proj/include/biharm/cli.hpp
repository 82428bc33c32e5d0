#pragma once

// Scenario runner behind the `biharm` command-line tool: config parsing,
// dispatch to the kernels / solver / analysis layers, JSON reports and CSV
// dumps.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "biharm/analysis.hpp"
#include "biharm/duffin.hpp"
#include "biharm/geometry.hpp"
#include "biharm/kernels.hpp"
#include "biharm/solver.hpp"

namespace biharm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchema = 1;

enum class ExitCode : int { pass = 0, violations = 1, usage = 2 };

/// Raised for malformed configs and flag values; maps to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view s, std::string_view key) {
    const std::string t = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        // Also accept simple fractions such as 1/64.
        const auto slash = t.find('/');
        if (slash != std::string::npos && slash > 0)
            return parse_double(t.substr(0, slash), key) / parse_double(t.substr(slash + 1), key);
        throw UsageError("invalid number '" + t + "' for " + std::string(key));
    }
    return v;
}

inline long parse_long(std::string_view s, std::string_view key) {
    const std::string t = trim(s);
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw UsageError("invalid integer '" + t + "' for " + std::string(key));
    return v;
}

inline std::vector<double> parse_list(std::string_view s, std::string_view key) {
    std::vector<double> out;
    std::string t = trim(s);
    std::size_t pos = 0;
    while (pos <= t.size()) {
        const auto comma = t.find(',', pos);
        const auto end = comma == std::string::npos ? t.size() : comma;
        out.push_back(parse_double(std::string_view(t).substr(pos, end - pos), key));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline Point2 parse_point(std::string_view s, std::string_view key) {
    const auto v = parse_list(s, key);
    if (v.size() != 2) throw UsageError(std::string(key) + " needs two coordinates");
    return {v[0], v[1]};
}

inline bool parse_bool(std::string_view s, std::string_view key) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw UsageError("invalid boolean '" + t + "' for " + std::string(key));
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + shortest(v[k]);
    return s;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Configuration

/// Every setting of a run. Keys are the long flag names without dashes
/// prefix; the config-file grammar is `key = value` per line with `#`
/// comments.
struct ScenarioConfig {
    std::string command;
    std::string domain = "disk:1";
    int n = 2;
    double h = 1.0 / 64.0;
    std::vector<double> h_list{1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0};
    int pairs = 1000;
    int pairs_per_source = 50;
    std::uint64_t seed = 42;
    std::string strategy = "boundary-stratified";
    std::string source = "solver"; ///< solver | exact
    std::string output;            ///< JSON report path (empty: none)
    std::string csv;               ///< CSV dump path (empty: none)
    std::string band_out;          ///< band CSV path (verify-estimate)
    std::string band_axis = "pair-distance";
    std::string geometry = "halfspace"; ///< halfspace | ball (kernel)
    std::string xi;                     ///< comma list; empty: command default
    std::string eta;
    std::string x0;
    double radius = 1.0;
    double epsilon = 0.01;
    double c = -1.0; ///< negative-part constant; < 0 uses the fitted c1
    double delta = 0.5;
    std::string regime = "A";
    int steps = 4;
    double scale0 = 0.8;
    double nodes_per_scale = 16.0;
    long node_budget = 1'000'000;
    double band = 0.125;
    std::string field = "halfspace"; ///< halfspace | square | linear | zero (duffin)
    bool boundary_check = true;
    double tol = 1e-10;

    /// Applies one `key = value` setting.
    void set(std::string key, std::string_view value) {
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string v = detail::trim(value);
        const auto num = [&] { return detail::parse_double(v, key); };
        const auto integer = [&] { return detail::parse_long(v, key); };
        if (key == "command") command = v;
        else if (key == "domain") domain = v;
        else if (key == "n") n = static_cast<int>(integer());
        else if (key == "h") h = num();
        else if (key == "h-list") h_list = detail::parse_list(v, key);
        else if (key == "pairs") pairs = static_cast<int>(integer());
        else if (key == "pairs-per-source") pairs_per_source = static_cast<int>(integer());
        else if (key == "seed") seed = static_cast<std::uint64_t>(integer());
        else if (key == "strategy") strategy = v;
        else if (key == "source") source = v;
        else if (key == "output") output = v;
        else if (key == "csv") csv = v;
        else if (key == "band-out") band_out = v;
        else if (key == "band-axis") band_axis = v;
        else if (key == "geometry") geometry = v;
        else if (key == "xi") xi = v;
        else if (key == "eta") eta = v;
        else if (key == "x0") x0 = v;
        else if (key == "radius") radius = num();
        else if (key == "epsilon") epsilon = num();
        else if (key == "c") c = num();
        else if (key == "delta") delta = num();
        else if (key == "regime") regime = v;
        else if (key == "steps") steps = static_cast<int>(integer());
        else if (key == "scale0") scale0 = num();
        else if (key == "nodes-per-scale") nodes_per_scale = num();
        else if (key == "node-budget") node_budget = integer();
        else if (key == "band") band = num();
        else if (key == "field") field = v;
        else if (key == "boundary-check") boundary_check = detail::parse_bool(v, key);
        else if (key == "tol") tol = num();
        else throw UsageError("unknown setting '" + key + "'");
    }

    nlohmann::ordered_json to_json() const {
        return {{"command", command},
                {"domain", domain},
                {"n", n},
                {"h", h},
                {"h-list", h_list},
                {"pairs", pairs},
                {"pairs-per-source", pairs_per_source},
                {"seed", seed},
                {"strategy", strategy},
                {"source", source},
                {"geometry", geometry},
                {"xi", xi},
                {"eta", eta},
                {"x0", x0},
                {"radius", radius},
                {"epsilon", epsilon},
                {"c", c},
                {"delta", delta},
                {"regime", regime},
                {"steps", steps},
                {"scale0", scale0},
                {"nodes-per-scale", nodes_per_scale},
                {"node-budget", node_budget},
                {"band", band},
                {"field", field},
                {"boundary-check", boundary_check},
                {"tol", tol}};
    }
};

/// Key/value pairs of a config file body, in file order.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(key, detail::trim(std::string_view(t).substr(eq + 1)));
    }
    return out;
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Reports

/// Outcome of a run. `samples` and `band` are kept for CSV and band export.
struct RunReport {
    std::string command;
    nlohmann::ordered_json config;
    nlohmann::ordered_json results;
    std::vector<GreenSample> samples;
    std::optional<EstimateBand> band;
    std::string checksum;
    double wall_clock = 0.0;
    ExitCode exit = ExitCode::pass;
    std::string summary; ///< one human-readable line

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json versions = {{"biharm", kVersion},
                                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                         std::to_string(EIGEN_MINOR_VERSION)}};
#if defined(BIHARM_HAVE_CHOLMOD)
        versions["cholmod"] = std::to_string(CHOLMOD_MAIN_VERSION) + "." + std::to_string(CHOLMOD_SUB_VERSION) + "." +
                              std::to_string(CHOLMOD_SUBSUB_VERSION);
#else
        versions["cholmod"] = "none";
#endif
        return {{"schema", kSchema},       {"command", command},
                {"config", config},        {"results", results},
                {"checksum", checksum},    {"status", exit == ExitCode::pass ? "pass" : "violations"},
                {"versions", versions},    {"wall_clock_seconds", wall_clock}};
    }
};

namespace detail {

/// FNV-1a over the bit patterns of a sequence of doubles.
class Fnv1a {
public:
    void feed(double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            hash_ ^= (bits >> (8 * b)) & 0xffU;
            hash_ *= 0x100000001b3ULL;
        }
    }
    std::string hex() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << hash_;
        return os.str();
    }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

} // namespace detail

/// Checksum of the sample set: points and G of every sample.
inline std::string sample_checksum(std::span<const GreenSample> samples) {
    detail::Fnv1a f;
    for (const auto& s : samples)
        for (double v : {s.pair.x[0], s.pair.x[1], s.pair.y[0], s.pair.y[1], s.G}) f.feed(v);
    return f.hex();
}

inline std::string sample_checksum(std::span<const KernelSample> samples) {
    detail::Fnv1a f;
    for (const auto& s : samples)
        for (double v : {s.dx, s.dy, s.r, s.G}) f.feed(v);
    return f.hex();
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Columns x1,x2,y1,y2,dx,dy,r,G,H,ratio with ratio = G / H.
inline std::string samples_csv(std::span<const GreenSample> samples) {
    std::string out = "x1,x2,y1,y2,dx,dy,r,G,H,ratio\n";
    for (const auto& s : samples) {
        const auto& p = s.pair;
        for (double v : {p.x[0], p.x[1], p.y[0], p.y[1], p.dx, p.dy, p.r, s.G, s.H}) out += csv_number(v) + ",";
        out += csv_number(s.G / s.H) + "\n";
    }
    return out;
}

enum class BandAxis { pair_distance, boundary_distance };

inline BandAxis parse_band_axis(std::string_view s) {
    if (s == "pair-distance") return BandAxis::pair_distance;
    if (s == "boundary-distance") return BandAxis::boundary_distance;
    throw UsageError("unknown band axis '" + std::string(s) + "' (pair-distance | boundary-distance)");
}

/// Band plot data from a verify-estimate report: abscissa (|x - y| or
/// sqrt(d(x) d(y))), G, lower = H / c2 - c1 d(x)^2 d(y)^2 and
/// upper = c2 H - c1 d(x)^2 d(y)^2, sorted by abscissa.
inline std::string emit_band_data(const RunReport& report, BandAxis axis) {
    if (report.command != "verify-estimate")
        throw std::invalid_argument("band data needs a verify-estimate report, got '" + report.command + "'");
    std::string out = "abscissa,G,lower,upper\n";
    if (report.samples.empty()) return out;
    if (!report.band) throw std::invalid_argument("verify-estimate report without a fitted band");
    const auto& b = *report.band;
    std::vector<std::array<double, 4>> rows;
    rows.reserve(report.samples.size());
    for (const auto& s : report.samples) {
        const double w = s.pair.dx * s.pair.dx * s.pair.dy * s.pair.dy;
        const double a = axis == BandAxis::pair_distance ? s.pair.r : std::sqrt(s.pair.dx * s.pair.dy);
        rows.push_back({a, s.G, s.H / b.c2 - b.c1 * w, b.c2 * s.H - b.c1 * w});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) { return l[0] < r[0]; });
    for (const auto& r : rows)
        out += csv_number(r[0]) + "," + csv_number(r[1]) + "," + csv_number(r[2]) + "," + csv_number(r[3]) + "\n";
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
    if (!out) throw UsageError("error writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Pipelines

namespace detail {

inline SolveOptions solve_options(const ScenarioConfig& cfg) {
    SolveOptions opt;
    opt.tol = cfg.tol;
    return opt;
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
}

inline void validate_common(const ScenarioConfig& cfg) {
    require(cfg.n >= 2, "n must be >= 2");
    require(cfg.h > 0.0, "h must be > 0");
    require(cfg.pairs >= 1, "pairs must be >= 1");
    require(cfg.pairs_per_source >= 1, "pairs-per-source must be >= 1");
    require(cfg.epsilon > 0.0, "epsilon must be > 0");
    require(cfg.tol > 0.0, "tol must be > 0");
    require(cfg.source == "solver" || cfg.source == "exact", "source must be solver or exact");
}

/// Planar samples from the exact disk kernel or the finite-difference solver.
inline std::vector<GreenSample> planar_samples(const ScenarioConfig& cfg, const DomainSpec& dom,
                                               SamplingStrategy strategy, nlohmann::ordered_json& info) {
    SamplingOptions so;
    so.strategy = strategy;
    if (cfg.source == "exact") {
        require(dom.kind() == DomainKind::disk, "source=exact is available on disk domains only");
        const auto pairs = sample_pairs(dom, cfg.pairs, cfg.seed, so);
        info["grid_h"] = 0.0;
        return exact_disk_samples(dom, pairs);
    }
    so.pairs_per_source = cfg.pairs_per_source;
    so.min_boundary_distance = 2.0 * cfg.h;
    so.min_pair_distance = 2.0 * cfg.h;
    const auto pairs = sample_pairs(dom, cfg.pairs, cfg.seed, so);
    const DiscreteGreen green(dom, cfg.h, solve_options(cfg));
    info["grid_h"] = cfg.h;
    info["unknowns"] = green.mask().inside_count();
    return discrete_samples(green, pairs);
}

inline nlohmann::ordered_json pair_json(const GreenSample& s) {
    return {{"x", s.pair.x}, {"y", s.pair.y}, {"dx", s.pair.dx}, {"dy", s.pair.dy},
            {"r", s.pair.r}, {"G", s.G},      {"H", s.H}};
}

inline void run_kernel(const ScenarioConfig& cfg, RunReport& rep) {
    const Dimension n(cfg.n);
    require(!cfg.xi.empty() && !cfg.eta.empty(), "kernel needs --xi and --eta");
    const auto xi = parse_list(cfg.xi, "xi");
    const auto eta = parse_list(cfg.eta, "eta");
    require(static_cast<int>(xi.size()) == cfg.n && static_cast<int>(eta.size()) == cfg.n,
            "xi and eta need n coordinates");
    double value = 0.0;
    try {
        if (cfg.geometry == "halfspace") value = halfspace_green(n, xi, eta);
        else if (cfg.geometry == "ball") value = ball_green(n, xi, eta, cfg.radius);
        else throw UsageError("geometry must be halfspace or ball");
    } catch (const std::domain_error& e) {
        throw UsageError(e.what());
    }
    rep.results = {{"geometry", cfg.geometry}, {"n", cfg.n}, {"xi", xi}, {"eta", eta}, {"value", value}};
    std::ostringstream os;
    os << std::setprecision(15) << value;
    rep.summary = os.str();
}

inline void run_solve(const ScenarioConfig& cfg, RunReport& rep) {
    const auto dom = DomainSpec::parse(cfg.domain);
    const Point2 y = cfg.eta.empty() ? dom.anchor() + (dom.kind() == DomainKind::rectangle
                                                            ? Point2{0.5 * dom.p(), 0.5 * dom.q()}
                                                            : Point2{0.0, 0.0})
                                     : parse_point(cfg.eta, "eta");
    const DiscreteGreen green(dom, cfg.h, solve_options(cfg));
    GridField col;
    try {
        col = green.column(y);
    } catch (const std::domain_error& e) {
        throw UsageError(e.what());
    }
    const Eigen::VectorXd b = dirac_source(col.mask, y).values;
    rep.results = {{"domain", dom.tag()},
                   {"smooth_boundary", dom.smooth_boundary()},
                   {"h", cfg.h},
                   {"source_point", y},
                   {"unknowns", green.mask().inside_count()},
                   {"method", green.solver().method() == SolveMethod::direct ? "direct" : "iterative"},
                   {"backward_error", green.solver().backward_error(b, col.values)},
                   {"relative_residual", green.solver().relative_residual(b, col.values)}};
    if (!cfg.xi.empty()) {
        const Point2 x = parse_point(cfg.xi, "xi");
        const double G = green_value(col, x);
        rep.results["x"] = x;
        rep.results["G"] = G;
        if (dom.kind() == DomainKind::disk) {
            const double ex = disk_green_exact(dom, x, y);
            rep.results["G_exact"] = ex;
            rep.results["relative_error"] = std::abs(G - ex) / std::abs(ex);
        }
    }
    if (!cfg.csv.empty()) {
        std::string out = "node,x1,x2,value\n";
        const auto& m = green.mask();
        for (int u = 0; u < m.inside_count(); ++u) {
            const auto [i, j] = m.inside_node(u);
            const Point2 p = m.node(i, j);
            out += std::to_string(u) + "," + csv_number(p[0]) + "," + csv_number(p[1]) + "," +
                   csv_number(col.values[u]) + "\n";
        }
        write_text(cfg.csv, out);
    }
    rep.summary = "solved " + std::to_string(green.mask().inside_count()) + " unknowns";
}

inline void run_verify_estimate(const ScenarioConfig& cfg, RunReport& rep) {
    validate_common(cfg);
    require(cfg.n == 2, "verify-estimate runs on planar domains (n = 2)");
    const auto dom = DomainSpec::parse(cfg.domain);
    nlohmann::ordered_json info;
    rep.samples = planar_samples(cfg, dom, parse_strategy(cfg.strategy), info);
    auto band = estimate_constants(rep.samples, cfg.epsilon);
    band.domain = dom.tag();
    band.seed = cfg.seed;
    band.h = cfg.source == "exact" ? 0.0 : cfg.h;
    const auto bad = band_violations(rep.samples, band);
    nlohmann::ordered_json viol = nlohmann::ordered_json::array();
    for (auto k : bad) viol.push_back(pair_json(rep.samples[k]));
    rep.results = {{"domain", dom.tag()},
                   {"smooth_boundary", dom.smooth_boundary()},
                   {"n", 2},
                   {"h", band.h},
                   {"seed", cfg.seed},
                   {"samples", rep.samples.size()},
                   {"source", cfg.source},
                   {"c1", band.c1},
                   {"c1_raw", band.c1_raw},
                   {"c2", band.c2},
                   {"epsilon", band.epsilon},
                   {"constants_are_empirical", true},
                   {"r_positivity", positivity_radius(rep.samples, dom.diameter())},
                   {"violations", viol}};
    if (info.contains("unknowns")) rep.results["unknowns"] = info["unknowns"];
    rep.band = band;
    if (!bad.empty()) rep.exit = ExitCode::violations;
    if (!cfg.band_out.empty()) write_text(cfg.band_out, emit_band_data(rep, parse_band_axis(cfg.band_axis)));
    rep.summary = "c1 = " + shortest(band.c1) + ", c2 = " + shortest(band.c2) + ", " + std::to_string(bad.size()) +
                  " violations";
}

inline void run_verify_positivity(const ScenarioConfig& cfg, RunReport& rep) {
    validate_common(cfg);
    require(cfg.n == 2, "verify-positivity runs on planar domains (n = 2)");
    const auto dom = DomainSpec::parse(cfg.domain);
    nlohmann::ordered_json info;
    rep.samples = planar_samples(cfg, dom, parse_strategy(cfg.strategy), info);
    const double r_pos = positivity_radius(rep.samples, dom.diameter());
    const auto band = estimate_constants(rep.samples, cfg.epsilon);
    const double c = cfg.c >= 0.0 ? cfg.c : band.c1;
    const auto neg = negative_part_report(rep.samples, c);

    nlohmann::ordered_json negatives = nlohmann::ordered_json::array();
    for (auto k : neg.negatives) {
        auto j = pair_json(rep.samples[k]);
        const auto& p = rep.samples[k].pair;
        j["ratio"] = c > 0.0 ? -rep.samples[k].G / (c * p.dx * p.dx * p.dy * p.dy)
                             : std::numeric_limits<double>::infinity();
        negatives.push_back(j);
    }
    nlohmann::ordered_json viol = nlohmann::ordered_json::array();
    for (auto k : neg.violations) viol.push_back(pair_json(rep.samples[k]));
    const bool no_counterexample = neg.negatives.empty();
    const bool peak_ok = no_counterexample || neg.negative_to_positive < 1.0;
    rep.results = {{"domain", dom.tag()},
                   {"smooth_boundary", dom.smooth_boundary()},
                   {"n", 2},
                   {"h", cfg.source == "exact" ? 0.0 : cfg.h},
                   {"seed", cfg.seed},
                   {"samples", rep.samples.size()},
                   {"source", cfg.source},
                   {"r_positivity", r_pos},
                   {"r_positivity_semantics", "no counterexample below r"},
                   {"no_counterexample", no_counterexample},
                   {"c", c},
                   {"c_is_fitted_c1", cfg.c < 0.0},
                   {"negative_count", neg.negatives.size()},
                   {"worst_ratio", neg.worst_ratio},
                   {"distance_weighted_constant", neg.distance_weighted_constant},
                   {"max_negative", neg.max_negative},
                   {"max_positive", neg.max_positive},
                   {"negative_to_positive", neg.negative_to_positive},
                   {"negatives", negatives},
                   {"violations", viol}};
    if (!neg.violations.empty() || !peak_ok || !(r_pos > 0.0)) rep.exit = ExitCode::violations;
    rep.summary = "r_positivity = " + shortest(r_pos) + ", " + std::to_string(neg.negatives.size()) +
                  " negative samples, " + std::to_string(neg.violations.size()) + " violations";
}

inline void run_nehari(const ScenarioConfig& cfg, RunReport& rep) {
    validate_common(cfg);
    require(cfg.delta > 0.0 && cfg.delta < 1.0, "delta must lie in (0, 1)");
    const Dimension n(cfg.n);
    std::vector<KernelSample> ks;
    nlohmann::ordered_json info;
    std::string domain;
    if (cfg.n >= 3) {
        require(cfg.radius > 0.0, "radius must be > 0");
        ks = ball_region_samples(n, cfg.radius, cfg.pairs, cfg.seed, cfg.delta);
        domain = "ball:" + shortest(cfg.radius);
    } else {
        const auto dom = DomainSpec::parse(cfg.domain);
        domain = dom.tag();
        rep.samples = planar_samples(cfg, dom, SamplingStrategy::near_diagonal, info);
        for (const auto& s : rep.samples) ks.push_back(s.kernel());
    }
    NehariResult res;
    try {
        res = nehari_region_check(n, ks, cfg.delta);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    nlohmann::ordered_json viol = nlohmann::ordered_json::array();
    for (auto k : res.violations) viol.push_back({{"dx", ks[k].dx}, {"dy", ks[k].dy}, {"r", ks[k].r}, {"G", ks[k].G}});
    if (rep.samples.empty()) rep.checksum = sample_checksum(std::span<const KernelSample>(ks));
    rep.results = {{"domain", domain},
                   {"n", cfg.n},
                   {"delta", cfg.delta},
                   {"source", cfg.n >= 3 ? "exact" : cfg.source},
                   {"samples", ks.size()},
                   {"region_count", res.region_count},
                   {"c3", res.c3},
                   {"constants_are_empirical", true},
                   {"violations", viol}};
    if (!res.violations.empty() || !(res.c3 > 0.0)) rep.exit = ExitCode::violations;
    rep.summary = "c3 = " + shortest(res.c3) + " over " + std::to_string(res.region_count) + " region pairs, " +
                  std::to_string(res.violations.size()) + " violations";
}

inline void run_blowup(const ScenarioConfig& cfg, RunReport& rep) {
    require(cfg.n == 2, "blowup is solver-backed and planar (n = 2)");
    require(cfg.steps >= 0, "steps must be >= 0");
    const auto dom = DomainSpec::parse(cfg.domain);
    BlowupRegime regime;
    if (cfg.regime == "A" || cfg.regime == "pair-distance") regime = BlowupRegime::pair_distance;
    else if (cfg.regime == "B" || cfg.regime == "boundary-distance") regime = BlowupRegime::boundary_distance;
    else throw UsageError("regime must be A or B");
    BlowupOptions opt;
    opt.xi = cfg.xi.empty() ? Point2{-1.0, 0.0} : parse_point(cfg.xi, "xi");
    opt.eta = !cfg.eta.empty() ? parse_point(cfg.eta, "eta")
              : regime == BlowupRegime::pair_distance ? Point2{-2.0, 0.0}
                                                      : Point2{-1.45, 0.15};
    opt.scale0 = cfg.scale0;
    opt.nodes_per_scale = cfg.nodes_per_scale;
    opt.node_budget = cfg.node_budget;
    opt.solve.tol = cfg.tol;
    Point2 x0 = cfg.x0.empty() ? Point2{} : parse_point(cfg.x0, "x0");
    if (cfg.x0.empty())
        x0 = dom.kind() == DomainKind::rectangle ? dom.anchor() + Point2{dom.p(), 0.5 * dom.q()} : dom.boundary_point(0.0);
    BlowupResult res;
    try {
        res = blowup_sequence(dom, x0, regime, cfg.steps, opt);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& s : res.steps)
        table.push_back({{"k", s.k},
                         {"scale", s.scale},
                         {"h", s.h},
                         {"nodes", s.nodes},
                         {"xi_k", s.xi_k},
                         {"eta_k", s.eta_k},
                         {"Gk", s.Gk},
                         {"G_halfspace", s.G_halfspace},
                         {"abs_error", s.abs_error},
                         {"growth", s.growth}});
    const auto verdict = assess_blowup(res);
    rep.results = {{"domain", dom.tag()},
                   {"x0", x0},
                   {"regime", regime == BlowupRegime::pair_distance ? "A" : "B"},
                   {"xi", opt.xi},
                   {"eta", opt.eta},
                   {"steps", table},
                   {"budget_exceeded", res.budget_exceeded},
                   {"message", res.message},
                   {"error_ratio", verdict.error_ratio},
                   {"growth_ratio", verdict.growth_ratio},
                   {"min_Gk", verdict.min_Gk},
                   {"pass", verdict.pass}};
    if (!verdict.pass) rep.exit = ExitCode::violations;
    rep.summary = std::to_string(res.steps.size()) + " steps, final/first error = " + shortest(verdict.error_ratio);
}

inline void run_duffin(const ScenarioConfig& cfg, RunReport& rep) {
    const Dimension two(2);
    const Point2 x0 = cfg.x0.empty() ? Point2{-1.0, 0.1} : parse_point(cfg.x0, "x0");
    require(x0[0] < 0.0, "x0 must lie in the half-plane y1 < 0");
    std::function<double(Point2)> f;
    if (cfg.field == "halfspace")
        f = [x0, two](Point2 y) { return y[0] >= 0.0 ? 0.0 : halfspace_green(two, x0, y); };
    else if (cfg.field == "square") f = [](Point2 y) { return y[0] * y[0]; };
    else if (cfg.field == "linear") f = [](Point2 y) { return y[0]; };
    else if (cfg.field == "zero") f = [](Point2) { return 0.0; };
    else throw UsageError("field must be halfspace, square, linear or zero");
    require(cfg.band > 0.0, "band must be > 0");
    DuffinOptions opt;
    opt.band = cfg.band;
    opt.check_boundary = cfg.boundary_check;
    std::vector<DuffinRow> rows;
    try {
        rows = duffin_convergence(f, cfg.h_list, opt);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& r : rows) table.push_back({{"h", r.h}, {"residual", r.residual}, {"ratio", r.ratio}});
    bool pass = true;
    std::string criterion;
    if (cfg.field == "square" || cfg.field == "zero") {
        // Polynomial data: the residual is pure rounding, about eps * 64 |H| / h^4.
        criterion = "rounding";
        for (const auto& r : rows) {
            const double scale = std::max(opt.depth, opt.height) * std::max(opt.depth, opt.height);
            pass = pass && r.residual <= 1e3 * 64.0 * std::numeric_limits<double>::epsilon() * scale / std::pow(r.h, 4);
        }
    } else {
        criterion = "residual halves per refinement";
        for (std::size_t k = 1; k < rows.size(); ++k) pass = pass && rows[k].ratio >= 2.0;
    }
    rep.results = {{"field", cfg.field},
                   {"x0", x0},
                   {"band", cfg.band},
                   {"boundary_check", cfg.boundary_check},
                   {"criterion", criterion},
                   {"rows", table},
                   {"pass", pass}};
    if (!pass) rep.exit = ExitCode::violations;
    rep.summary = "final residual " + detail::sci(rows.empty() ? 0.0 : rows.back().residual);
}

/// Five well-separated pairs (d >= 0.3, r >= 0.3) scaled to the domain.
inline std::vector<PointPair> reference_pairs(const DomainSpec& dom) {
    static constexpr std::array<std::array<double, 4>, 5> unit = {{{0.0, 0.0, 0.5, 0.0},
                                                                   {0.3, 0.2, -0.3, 0.1},
                                                                   {0.0, 0.6, 0.0, -0.3},
                                                                   {0.4, 0.4, -0.2, -0.3},
                                                                   {-0.5, 0.2, 0.1, 0.5}}};
    const auto& b = dom.bounds();
    const Point2 mid = 0.5 * (b.lo + b.hi);
    const double s = 0.5 * std::min(b.hi[0] - b.lo[0], b.hi[1] - b.lo[1]);
    std::vector<PointPair> out;
    for (const auto& u : unit) {
        const Point2 x = mid + s * Point2{u[0], u[1]}, y = mid + s * Point2{u[2], u[3]};
        if (!dom.contains(x) || !dom.contains(y)) continue;
        out.push_back({x, y, dom.distance_to_boundary(x), dom.distance_to_boundary(y), distance(x, y)});
    }
    return out;
}

inline void run_convergence(const ScenarioConfig& cfg, RunReport& rep) {
    const auto dom = DomainSpec::parse(cfg.domain);
    require(!cfg.h_list.empty(), "h-list must not be empty");
    const auto pairs = reference_pairs(dom);
    require(!pairs.empty(), "no reference pair lies inside the domain");
    ConvergenceTable table;
    try {
        table = convergence_study(dom, pairs, cfg.h_list, solve_options(cfg));
    } catch (const std::domain_error& e) {
        throw UsageError(e.what());
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    const auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
    for (const auto& r : table.rows)
        rows.push_back({{"h", r.h}, {"max_rel_error", num(r.max_rel_error)}, {"order", num(r.order)}, {"ratio", num(r.ratio)}});
    const auto verdict = assess_convergence(table);
    nlohmann::ordered_json pj = nlohmann::ordered_json::array();
    for (const auto& p : pairs) pj.push_back({{"x", p.x}, {"y", p.y}});
    rep.results = {{"domain", dom.tag()},
                   {"mode", table.oracle ? "oracle" : "richardson"},
                   {"pairs", pj},
                   {"rows", rows},
                   {"overall_order", num(verdict.overall_order)},
                   {"pass", verdict.pass}};
    if (!verdict.pass) rep.exit = ExitCode::violations;
    rep.summary = std::string(table.oracle ? "oracle" : "richardson") + " mode, final error " +
                  detail::sci(table.rows.back().max_rel_error);
}

} // namespace detail

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"kernel",  "solve",  "verify-estimate", "verify-positivity",
                                                "nehari",  "blowup", "duffin",          "convergence"};
    return names;
}

/// Runs one scenario. Usage problems throw UsageError; failed checks set
/// report.exit to ExitCode::violations. Files named in the config are
/// written before returning.
inline RunReport run(const ScenarioConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.command = cfg.command;
    rep.config = cfg.to_json();
    try {
        if (cfg.command == "kernel") detail::run_kernel(cfg, rep);
        else if (cfg.command == "solve") detail::run_solve(cfg, rep);
        else if (cfg.command == "verify-estimate") detail::run_verify_estimate(cfg, rep);
        else if (cfg.command == "verify-positivity") detail::run_verify_positivity(cfg, rep);
        else if (cfg.command == "nehari") detail::run_nehari(cfg, rep);
        else if (cfg.command == "blowup") detail::run_blowup(cfg, rep);
        else if (cfg.command == "duffin") detail::run_duffin(cfg, rep);
        else if (cfg.command == "convergence") detail::run_convergence(cfg, rep);
        else throw UsageError("unknown command '" + cfg.command + "'");
    } catch (const UsageError&) {
        throw;
    } catch (const NumericalError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (rep.checksum.empty()) rep.checksum = sample_checksum(std::span<const GreenSample>(rep.samples));
    if (!cfg.csv.empty() && cfg.command != "solve") write_text(cfg.csv, samples_csv(rep.samples));
    rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.output.empty()) write_text(cfg.output, rep.to_json().dump(2) + "\n");
    return rep;
}

} // namespace biharm
