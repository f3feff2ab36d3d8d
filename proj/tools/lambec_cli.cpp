// Command-line front end: runs one scenario preset and writes its CSV
// files and manifest.
//
//   lambec <scenario> [--config FILE] [--set key=value ...] [--out DIR]
//
// The output directory is taken from --out, then output.directory in the
// configuration, then $LAMBEC_OUTPUT_DIR, then the working directory.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lambec/lambec.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lambec::IoError("cannot read config file", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lambda-scheme condensate: optical response and probe photon statistics"};
    app.set_version_flag("--version", LAMBEC_VERSION);

    std::vector<std::string> names;
    for (auto id : lambec::all_scenarios) names.emplace_back(lambec::scenario_name(id));

    std::string scenario;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool dump_config = false;

    app.add_option("scenario", scenario, "Scenario preset")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("--config", config_path, "Configuration file (key = value lines)");
    app.add_option("--set", overrides, "Override one key, e.g. --set quantum.n0=10")
        ->allow_extra_args(false);
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--print-config", dump_config, "Print the resolved configuration and exit");

    CLI11_PARSE(app, argc, argv);

    const auto id = *lambec::scenario_from_name(scenario);
    try {
        lambec::RunConfig cfg;
        if (!config_path.empty()) lambec::apply_config_text(cfg, read_file(config_path));
        for (std::size_t i = 0; i < overrides.size(); ++i) {
            const std::string& kv = overrides[i];
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw lambec::ParseError("--set expects key=value, got '" + kv + "'",
                                         static_cast<int>(i + 1));
            cfg.set(lambec::detail::trim(kv.substr(0, eq)), lambec::detail::trim(kv.substr(eq + 1)),
                    static_cast<int>(i + 1));
        }
        lambec::resolve_exclusive_inputs(cfg);
        lambec::validate_config(cfg);

        if (dump_config) {
            lambec::RunConfig shown = cfg;
            lambec::apply_scenario_presets(id, shown);
            std::cout << lambec::serialize(shown);
            return 0;
        }

        std::string dir = ".";
        if (const char* env = std::getenv("LAMBEC_OUTPUT_DIR"); env && *env) dir = env;
        if (cfg.user_set("output.directory")) dir = cfg.text("output.directory");
        if (!out_dir.empty()) dir = out_dir;

        const lambec::RunResult res = lambec::run_scenario(id, cfg, dir);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& f : res.files) std::cout << f.string() << '\n';
    } catch (const lambec::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
