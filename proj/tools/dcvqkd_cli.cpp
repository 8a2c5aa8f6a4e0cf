// dcvqkd: command-line front-end.
//
//   dcvqkd simulate        --config fig3.scn --out results/
//   dcvqkd calibrate       --config vac.scn --seed 7
//   dcvqkd compare-kernels --config kernels.scn
//   dcvqkd sweep           --config offset.scn --threads 4

#include "dcvqkd/errors.hpp"
#include "dcvqkd/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <string>

using namespace dcvqkd;

int main(int argc, char** argv) {
    CLI::App app{"Digital-receiver CV-QKD simulator"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    unsigned threads = 1;
    std::uint64_t seed = 0;

    using Runner = std::function<RunOutcome(const Scenario&, const RunOptions&)>;
    const std::map<std::string, std::pair<std::string, Runner>> commands{
        {"simulate", {"key rate and mode matching versus distance", run_simulate}},
        {"calibrate", {"Monte Carlo shot-noise calibration", run_calibrate}},
        {"compare-kernels", {"rank DSP kernels by mode-matching efficiency", run_compare_kernels}},
        {"sweep", {"sweep distance, sampling offset or IRF width", run_sweep}},
    };
    std::map<std::string, CLI::Option*> seed_opts;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
        seed_opts[name] = sub->add_option("--seed", seed, "RNG seed, overrides the scenario");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    RunOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    if (seed_opts.at(name)->count() > 0) opt.seed = seed;

    Scenario scenario;
    try {
        scenario = load_scenario(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        const RunOutcome r = commands.at(name).second(scenario, opt);
        std::cout << r.summary << "wrote " << r.csv.string() << "\nwrote " << r.report.string() << "\n";
        return r.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
