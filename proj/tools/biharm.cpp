// biharm: scenario runner for the clamped-plate Green function toolkit.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "biharm/cli.hpp"

namespace {

struct Setting {
    const char* key;
    const char* help;
};

// Every config key doubles as a --flag.
constexpr Setting kSettings[] = {
    {"domain", "disk:R | ellipse:a,b | limacon:a,b | rect:w,h"},
    {"n", "space dimension"},
    {"h", "grid spacing (fractions such as 1/128 accepted)"},
    {"h-list", "comma-separated decreasing spacings (convergence, duffin)"},
    {"pairs", "number of sampled pairs"},
    {"pairs-per-source", "pairs sharing one source point (one solve each)"},
    {"seed", "sampling seed"},
    {"strategy", "uniform | boundary-stratified | near-diagonal"},
    {"source", "solver | exact (exact: disk only)"},
    {"output", "JSON report path"},
    {"csv", "CSV dump path (samples, or the Green column for solve)"},
    {"band-out", "band plot CSV path (verify-estimate)"},
    {"band-axis", "pair-distance | boundary-distance"},
    {"geometry", "halfspace | ball (kernel)"},
    {"xi", "first point, comma-separated (kernel, blowup; evaluation point for solve)"},
    {"eta", "second point (kernel, blowup; source point for solve)"},
    {"x0", "boundary point (blowup) or singular point (duffin)"},
    {"radius", "ball radius (kernel, nehari with n >= 3)"},
    {"epsilon", "c1 margin"},
    {"c", "negative-part constant; negative uses the fitted c1"},
    {"delta", "near-diagonal region parameter"},
    {"regime", "A (pair-distance) | B (boundary-distance)"},
    {"steps", "blow-up steps"},
    {"scale0", "blow-up scale before the first halving"},
    {"nodes-per-scale", "blow-up grid nodes per scale length"},
    {"node-budget", "blow-up node budget"},
    {"band", "half-width of the residual band (duffin)"},
    {"field", "halfspace | square | linear | zero (duffin)"},
    {"boundary-check", "check H = dH/dy1 = 0 before reflecting (duffin)"},
    {"tol", "linear-solve tolerance (normwise backward error)"},
};

std::string default_text(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : ",") + e.dump();
        return s;
    }
    return v.dump();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biharmonic Green functions: exact kernels, clamped-plate solver and estimate checks"};
    app.footer("Exit status: 0 pass, 1 violations found, 2 usage error.\n"
               "Config files hold `key = value` lines (keys as the flags above, `#` starts a comment);\n"
               "flags given on the command line override file values.");

    // --h is the grid spacing, so help is long-form only
    app.set_help_flag("--help", "Print this help message and exit");

    std::string command;
    std::string config_path;
    app.add_option("command", command, "kernel | solve | verify-estimate | verify-positivity | nehari | blowup | "
                                       "duffin | convergence")
        ->check(CLI::IsMember(biharm::command_names()));
    app.add_option("--config", config_path, "key = value config file");

    const auto defaults = biharm::ScenarioConfig{}.to_json();
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
    for (const auto& s : kSettings) {
        auto* opt = app.add_option(std::string("--") + s.key, flags[s.key], s.help);
        if (defaults.contains(s.key)) opt->default_str(default_text(defaults[s.key]));
        options[s.key] = opt;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(biharm::ExitCode::usage);
    }

    try {
        biharm::ScenarioConfig cfg;
        if (!config_path.empty())
            for (const auto& [k, v] : biharm::read_config_file(config_path)) cfg.set(k, v);
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) cfg.set(key, flags[key]);
        if (!command.empty()) cfg.command = command;
        if (cfg.command.empty()) throw biharm::UsageError("no command given (see --help)");

        const auto report = biharm::run(cfg);
        if (cfg.command == "kernel") {
            std::cout << report.summary << "\n";
        } else {
            std::cout << cfg.command << ": " << report.summary << "\n";
            if (cfg.output.empty()) std::cout << report.to_json().dump(2) << "\n";
        }
        return static_cast<int>(report.exit);
    } catch (const biharm::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(biharm::ExitCode::usage);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(biharm::ExitCode::violations);
    }
}
