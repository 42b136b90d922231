#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rcr/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"random-current simulator and verification suite for the transverse-field "
                 "Ising model"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string command_override;
    std::string output_override;
    uint64_t seed_override = 0;
    bool seed_set = false;
    uint64_t nsamples_override = 0;
    int workers_override = 0;
    bool json_summary = false;

    app.add_option("-c,--config", config_path, "JSON run configuration")->required();
    app.add_option("--command", command_override, "override the config's command");
    app.add_option("-o,--output", output_override, "override the output path");
    app.add_option("--seed", seed_override, "override the seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--nsamples", nsamples_override, "override the sample count");
    app.add_option("--workers", workers_override, "worker thread count");
    app.add_flag("--json", json_summary, "emit a machine-readable summary line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help();
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        rcr::RunConfig config = rcr::RunConfig::from_json_file(config_path);
        if (!command_override.empty()) config.command = command_override;
        if (!output_override.empty()) config.output = output_override;
        if (seed_set) {
            config.seed = seed_override;
            config.seed_given = true;
        }
        if (nsamples_override) config.nsamples = nsamples_override;
        if (workers_override) config.workers = workers_override;
        config.json_summary = json_summary;
        return rcr::run(std::move(config));
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
