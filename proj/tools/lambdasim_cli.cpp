// Command-line front end: run / rates / validate over an experiment config.
#include <CLI11.hpp>

#include <iostream>

#include "lambdasim/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Semi-quantum simulator for phonon-dephased Lambda-system photon sources"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool plot_script = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    };
    CLI::App* run = app.add_subcommand("run", "propagate and write summary/timeseries CSVs");
    run->add_flag("--plot-script", plot_script, "also write a gnuplot script for the CSVs");
    CLI::App* rates = app.add_subcommand(
        "rates", "production rate vs target indistinguishability for both strategies");
    CLI::App* validate =
        app.add_subcommand("validate", "invariant suite and trajectory-oracle comparison");
    add_common(run);
    add_common(rates);
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        lambdasim::ExperimentConfig config = lambdasim::ExperimentConfig::parse_file(config_path);
        if (!out_dir.empty()) config.output.directory = out_dir;
        if (run->parsed()) return lambdasim::cmd_run(config, std::cout, plot_script);
        if (rates->parsed()) return lambdasim::cmd_rates(config, std::cout);
        return lambdasim::cmd_validate(config, std::cout);
    } catch (const lambdasim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
