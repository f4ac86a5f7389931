#pragma once

#include "dilagrad/field.hpp"
#include "dilagrad/levelset.hpp"
#include "dilagrad/suites.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dilagrad {

/// A configuration could not be resolved into concrete objects (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    nlohmann::json doc = nlohmann::json::object();
    std::filesystem::path config_dir = "."; ///< relative file paths resolve against this
    std::filesystem::path out_dir = "dilagrad-out";
    std::uint64_t seed = 1;
    bool negative_control = false;
};

/// Commands understood by run_command.
const std::vector<std::string>& command_names();

/// The bundled configuration of a command.
nlohmann::json default_config(const std::string& command);

/// Reads the JSON config (or the bundled default when `config_path` is
/// empty) and applies command-line overrides. Throws ConfigError.
RunConfig load_run_config(const std::string& command, const std::optional<std::filesystem::path>& config_path,
                          const std::optional<std::filesystem::path>& out_dir, const std::optional<std::uint64_t>& seed,
                          bool negative_control);

// Resolution of config fragments; all throw ConfigError on bad input.
MeshPtr resolve_mesh(const nlohmann::json& spec, const std::filesystem::path& base);
LevelSetFunction resolve_level_set(const nlohmann::json& spec, MeshPtr mesh, const std::filesystem::path& base);
PiecewiseField resolve_field(const nlohmann::json& spec, MeshPtr mesh, suites::Rng& rng);
suites::LadderSpec resolve_ladder(const nlohmann::json& doc);
AffineSource resolve_source(const nlohmann::json& spec);

/// Runs one command, writing reports under cfg.out_dir and progress to log.
/// Returns 0 when every check passes, 1 otherwise; throws ConfigError for
/// unresolvable configurations.
int run_command(const RunConfig& cfg, std::ostream& log);

/// Text for `--help`: the CSV columns written by each command.
std::string csv_column_help();

} // namespace dilagrad
