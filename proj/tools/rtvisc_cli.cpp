#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rtv/commands.hpp"
#include "rtv/config.hpp"
#include "rtv/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Viscous Rayleigh-Taylor characteristic-value solver"};
    std::string command;
    std::string config_path;
    rtv::CommandOptions opts;
    app.add_option("command", command, "dispersion | modes | outer-coeffs | oracle | verify")
        ->required()
        ->check(CLI::IsMember(rtv::command_names()));
    app.add_option("--config", config_path, "config file (sectioned key = value)")->required();
    app.add_option("--out", opts.out_dir, "output directory (overrides output.directory)");
    app.add_option("--threads", opts.threads, "worker threads over the k grid, 0 = auto")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", opts.seed, "seed for randomized probes in verify");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[usage]: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        const auto config = rtv::load_config(config_path);
        return rtv::run_command(command, config, opts, std::cout);
    } catch (const rtv::ConfigError& e) {
        std::cerr << "error[" << e.tag() << "]: " << e.what() << '\n';
        return 2;
    } catch (const rtv::Error& e) {
        std::cerr << "error[" << e.tag() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 1;
    }
}
