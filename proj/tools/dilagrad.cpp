#include "dilagrad/commands.hpp"
#include "dilagrad/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace dilagrad;
    CLI::App app{"Shape derivatives of level-set domains on fixed simplicial meshes, with finite-difference checks."};
    app.footer(csv_column_help());
    app.require_subcommand(1);

    std::string config, out;
    std::uint64_t seed = 0;
    bool negative_control = false;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name, "");
        sub->add_option("--config", config, "JSON run configuration (bundled default when omitted)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory for CSV, SVG and JSON reports");
        sub->add_option("--seed", seed, "seed for randomized suites (overrides the config)");
        sub->add_flag("--negative-control", negative_control, "corrupt the references; checks are expected to fail");
    }
    app.get_subcommand("check-dj1")->description("Taylor test of the volume-functional semiderivative");
    app.get_subcommand("check-dj2")->description("Taylor test of the boundary-functional semiderivative");
    app.get_subcommand("check-identities")->description("layer, integration-by-parts, Jacobian, energy and hat-sum identities");
    app.get_subcommand("compare-fitted-unfitted")->description("fitted vs cut derivatives of the Poisson compliance over refinements");
    app.get_subcommand("optimize")->description("demo steepest descent on the nodal level-set values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommand(command);
    try {
        const auto cfg = load_run_config(
            command, sub->count("--config") ? std::optional<std::filesystem::path>(config) : std::nullopt,
            sub->count("--out") ? std::optional<std::filesystem::path>(out) : std::nullopt,
            sub->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt, negative_control);
        const int code = run_command(cfg, std::cout);
        std::cout << "reports written to " << cfg.out_dir.string() << "\n";
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
