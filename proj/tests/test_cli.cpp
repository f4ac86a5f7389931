#include "dilagrad/commands.hpp"
#include "dilagrad/dilation.hpp"
#include "dilagrad/errors.hpp"
#include "dilagrad/mesh_io.hpp"
#include "dilagrad/svg.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace dilagrad;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("dilagrad_cli_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig config(const std::string& cmd, const json& doc, const std::string& out, std::uint64_t seed = 1)
{
    RunConfig cfg;
    cfg.command = cmd;
    cfg.doc = doc;
    cfg.out_dir = scratch(out);
    cfg.seed = seed;
    return cfg;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::istringstream in(read_text_file(p.string()));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        rows.push_back(cols);
    }
    return rows;
}

const json kSmallDj = json::parse(R"({
  "cases": [{"name": "r", "random": {"dim": 2, "cells": 4, "count": 3, "f_degree": 2}}],
  "ladder": {"k_min": 3, "k_max": 6},
  "svg": false
})");

} // namespace

TEST_CASE("every command has a bundled default")
{
    for (const auto& c : command_names()) {
        const auto cfg = load_run_config(c, std::nullopt, std::nullopt, std::nullopt, false);
        CHECK(cfg.command == c);
        CHECK(cfg.doc.is_object());
    }
    CHECK_THROWS_AS(default_config("frobnicate"), ConfigError);
    CHECK_FALSE(csv_column_help().empty());
}

TEST_CASE("config files: overrides and errors")
{
    const fs::path dir = DILAGRAD_CONFIG_DIR;
    const auto cfg = load_run_config("check-dj2", dir / "check_dj2_negative_control.json", fs::path("x"), 7, false);
    CHECK(cfg.negative_control);
    CHECK(cfg.seed == 7);
    CHECK(cfg.out_dir == fs::path("x"));
    CHECK(cfg.config_dir == dir);
    CHECK_THROWS_AS(load_run_config("optimize", dir / "check_dj1.json", std::nullopt, std::nullopt, false), ConfigError);
    CHECK_THROWS_AS(load_run_config("check-dj1", dir / "missing.json", std::nullopt, std::nullopt, false), ConfigError);

    const auto bad_json = scratch("bad_json.json");
    write_text_file_atomic(bad_json.string(), "{\n  \"cases\": [\n");
    CHECK_THROWS_AS(load_run_config("check-dj1", bad_json, std::nullopt, std::nullopt, false), ConfigError);
}

TEST_CASE("resolvers reject malformed fragments")
{
    CHECK_THROWS_AS(resolve_mesh(json{{"dim", 4}}, "."), ConfigError);
    CHECK_THROWS_AS(resolve_mesh(json{{"dim", 2}, {"cells", {2}}, {"extent", {1, 1}}}, "."), ConfigError);
    auto mesh = resolve_mesh(json{{"dim", 2}, {"cells", {2, 2}}, {"extent", {1, 1}}}, ".");
    CHECK(mesh->num_cells() == 16);
    CHECK_THROWS_AS(resolve_level_set(json{{"kind", "torus"}}, mesh, "."), ConfigError);
    CHECK_THROWS_AS(resolve_level_set(json{{"kind", "plane"}, {"normal", {0, 0}}, {"offset", 0}}, mesh, "."), ConfigError);
    CHECK_THROWS_AS(resolve_level_set(json{{"kind", "values"}, {"nodal_values", {1, 2}}}, mesh, "."), ConfigError);
    suites::Rng rng(1);
    CHECK_THROWS_AS(resolve_field(json{{"kind", "random"}, {"degree", 9}}, mesh, rng), ConfigError);
    CHECK_THROWS_AS(resolve_ladder(json{{"ladder", {{"t", {0.1, 0.2}}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_ladder(json{{"ladder", {{"k_min", 5}, {"k_max", 5}}}}), ConfigError);
    const auto src = resolve_source(json{{"value", 2.0}, {"gradient", {1.0, 0.0}}});
    CHECK(src.value == 2.0);
    CHECK(src.gradient.x() == 1.0);
}

TEST_CASE("check-dj1: CSV references match direct library calls")
{
    auto cfg = config("check-dj1", kSmallDj, "dj1", 5);
    std::ostringstream log;
    REQUIRE(run_command(cfg, log) == 0);
    const auto rows = read_csv(cfg.out_dir / "check-dj1.csv");
    REQUIRE(rows.size() == 1 + 3 * 4);
    CHECK(rows[0][7] == "reference");

    const auto insts = suites::random_instances(2, 4, 3, 5 * 1000003ull + 0, 2);
    std::map<std::string, const suites::Instance*> by_id;
    for (const auto& inst : insts) by_id["r-" + inst.id] = &inst;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        REQUIRE(row.size() == 12);
        const auto* inst = by_id.at(row[1]);
        CHECK(std::stoi(row[3]) == inst->w.center_node);
        const double ref = dj1(inst->phi, inst->w, inst->f).value;
        CHECK(std::stod(row[7]) == ref);
        // the quotient column is a plain difference quotient of J1
        const double t = std::stod(row[5]);
        const double q = (volume_functional(perturb(inst->phi, inst->w, t), inst->f) - volume_functional(inst->phi, inst->f)) / t;
        CHECK(std::abs(std::stod(row[6]) - q) <= 1e-12 * std::max(1.0, std::abs(q)));
        CHECK(row[11] == "1");
    }
    CHECK(fs::exists(cfg.out_dir / "check-dj1_derivatives.json"));
    const auto derivs = json::parse(read_text_file((cfg.out_dir / "check-dj1_derivatives.json").string()));
    CHECK(derivs.size() == 3);
    CHECK(log.str().find("3/3 instances passed") != std::string::npos);
}

TEST_CASE("check-dj2: deterministic for a fixed seed, sensitive to the seed")
{
    auto a = config("check-dj2", kSmallDj, "dj2a", 11);
    auto b = config("check-dj2", kSmallDj, "dj2b", 11);
    auto c = config("check-dj2", kSmallDj, "dj2c", 12);
    std::ostringstream log;
    CHECK(run_command(a, log) == 0);
    CHECK(run_command(b, log) == 0);
    CHECK(run_command(c, log) == 0);
    const auto ta = read_text_file((a.out_dir / "check-dj2.csv").string());
    CHECK(ta == read_text_file((b.out_dir / "check-dj2.csv").string()));
    CHECK(ta != read_text_file((c.out_dir / "check-dj2.csv").string()));
}

TEST_CASE("check-dj: negative control fails")
{
    auto cfg = config("check-dj1", kSmallDj, "dj1neg");
    cfg.negative_control = true;
    std::ostringstream log;
    CHECK(run_command(cfg, log) == 1);
    CHECK(log.str().find("[FAIL]") != std::string::npos);
}

TEST_CASE("check-dj: empty domain is a reported no-op")
{
    const auto doc = json::parse(R"({
      "cases": [{"name": "empty", "mesh": {"dim": 2, "cells": [4, 4], "extent": [1, 1]},
                 "level_set": {"kind": "plane", "normal": [1, 0], "offset": -0.5}, "nodes": [12]}],
      "svg": true
    })");
    auto cfg = config("check-dj1", doc, "empty");
    std::ostringstream log;
    CHECK(run_command(cfg, log) == 0);
    CHECK(log.str().find("no-op") != std::string::npos);
    const auto rows = read_csv(cfg.out_dir / "check-dj1.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(std::stod(rows[1][7]) == 0.0);
    CHECK(std::stod(rows[1][6]) == 0.0);
    CHECK(fs::exists(cfg.out_dir / "check-dj1_empty-node12.svg"));
}

TEST_CASE("check-dj: bad node list")
{
    const auto doc = json::parse(R"({
      "cases": [{"mesh": {"dim": 2, "cells": [2, 2], "extent": [1, 1]},
                 "level_set": {"kind": "sphere", "center": [0.5, 0.5], "radius": 0.3}, "nodes": [999]}]
    })");
    std::ostringstream log;
    CHECK_THROWS_AS(run_command(config("check-dj1", doc, "badnode"), log), ConfigError);
    CHECK_THROWS_AS(run_command(config("check-dj1", json::object(), "nocases"), log), ConfigError);
}

TEST_CASE("check-identities: CSV values match the suite functions")
{
    const json doc{{"count", 3}, {"dims", {2}}, {"checks", {"layer_strip", "partition_of_unity", "jacobian"}}};
    auto cfg = config("check-identities", doc, "ident", 4);
    std::ostringstream log;
    REQUIRE(run_command(cfg, log) == 0);
    const auto rows = read_csv(cfg.out_dir / "check_identities.csv");
    REQUIRE(rows.size() == 4);
    const std::uint64_t sd = 4 * 31 + 2;
    const std::vector<suites::CheckLine> expect{suites::layer_vs_strip(2, 3, sd, false),
                                                suites::partition_of_unity(2, sd, false),
                                                suites::jacobian_fd(2, sd, false)};
    for (size_t i = 0; i < expect.size(); ++i) {
        CHECK(rows[i + 1][0] == "\"" + expect[i].name + "\"");
        CHECK(std::stod(rows[i + 1][1]) == expect[i].value);
        CHECK(rows[i + 1][3] == "1");
    }

    std::ostringstream none_log;
    CHECK(run_command(config("check-identities", json{{"checks", json::array()}}, "ident_none"), none_log) == 0);
    CHECK(none_log.str().find("no-op") != std::string::npos);
    CHECK_THROWS_AS(run_command(config("check-identities", json{{"checks", {"bogus"}}}, "ident_bad"), none_log),
                    ConfigError);
}

TEST_CASE("compare-fitted-unfitted: single level and zero source")
{
    const json doc{{"levels", 1}, {"source", {{"value", 0.0}, {"gradient", {0.0, 0.0}}}}};
    auto cfg = config("compare-fitted-unfitted", doc, "cmp");
    std::ostringstream log;
    CHECK(run_command(cfg, log) == 0);
    CHECK(log.str().find("single level") != std::string::npos);
    const auto rows = read_csv(cfg.out_dir / "compare_fitted_unfitted.csv");
    REQUIRE(rows.size() == 2);
    for (size_t k = 2; k <= 5; ++k) CHECK(std::stod(rows[1][k]) == 0.0);
}

TEST_CASE("optimize: zero source and no penalty stops at once")
{
    const json doc{{"mesh_cells", 8},
                   {"source", {{"value", 0.0}, {"gradient", {0.0, 0.0}}}},
                   {"optimizer", {{"max_iterations", 5}, {"lambda", 0.0}}},
                   {"svg_every", 0}};
    auto cfg = config("optimize", doc, "opt");
    std::ostringstream log;
    CHECK(run_command(cfg, log) == 0);
    const auto rows = read_csv(cfg.out_dir / "optimize.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(std::stod(rows[1][4]) == 0.0);
    CHECK(rows.size() == 2);

    CHECK_THROWS_AS(run_command(config("optimize", json{{"dirichlet_label", "nowhere"}}, "opt_bad"), log),
                    ConfigError);
    CHECK_THROWS_AS(run_command(config("optimize", json{{"optimizer", {{"step", -1.0}}}}, "opt_bad2"), log),
                    ConfigError);
}

TEST_CASE("svg: deterministic, layered, aligned faces highlighted")
{
    auto mesh = resolve_mesh(json{{"dim", 2}, {"cells", {4, 4}}, {"extent", {1, 1}}}, ".");
    const auto disk = resolve_level_set(json{{"kind", "sphere"}, {"center", {0.5, 0.5}}, {"radius", 0.3}}, mesh, ".");
    SvgOverlays ov;
    ov.hat = HatPerturbation{12};
    const auto s1 = render_svg(disk, ov), s2 = render_svg(disk, ov);
    CHECK(s1 == s2);
    for (const char* g : {"id=\"omega\"", "id=\"support\"", "id=\"mesh\"", "id=\"boundary\"", "<circle"})
        CHECK(s1.find(g) != std::string::npos);
    CHECK(s1.find("#d62728") == std::string::npos);

    const auto half = resolve_level_set(json{{"kind", "plane"}, {"normal", {1, 0}}, {"offset", 0.5}}, mesh, ".");
    const auto s3 = render_svg(half);
    CHECK(s3.find("#d62728") != std::string::npos);
    CHECK(s3.find("<circle") == std::string::npos);

    auto m3 = resolve_mesh(json{{"dim", 3}, {"cells", {1, 1, 1}}, {"extent", {1, 1, 1}}}, ".");
    const LevelSetFunction p3(m3, std::vector<double>(m3->num_vertices(), -1.0));
    CHECK_THROWS_AS(render_svg(p3), UnsupportedError);
}
