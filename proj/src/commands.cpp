#include "dilagrad/commands.hpp"

#include "dilagrad/cutgeom.hpp"
#include "dilagrad/errors.hpp"
#include "dilagrad/mesh_io.hpp"
#include "dilagrad/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dilagrad {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kDefaultCheckDj = R"({
  "cases": [
    {"name": "random-2d", "random": {"dim": 2, "cells": 4, "count": 20, "f_degree": 2}},
    {"name": "random-3d", "random": {"dim": 3, "cells": 3, "count": 10, "f_degree": 2}},
    {"name": "disk",
     "mesh": {"dim": 2, "cells": [8, 8], "extent": [1, 1]},
     "level_set": {"kind": "sphere", "center": [0.5, 0.5], "radius": 0.3},
     "field": {"kind": "linear", "value": 1.0, "gradient": [0.5, -0.25]},
     "nodes": "band"}
  ],
  "ladder": {"k_min": 3, "k_max": 8},
  "svg": true
})";

const char* kDefaultIdentities = R"({
  "count": 10,
  "dims": [2, 3],
  "checks": ["layer_strip", "ibp_smooth", "ibp_jump", "ibp_fitted", "jacobian", "energy", "partition_of_unity"]
})";

const char* kDefaultCompare = R"({
  "levels": 3,
  "source": {"value": 1.0, "gradient": [0.3, -0.2]}
})";

const char* kDefaultOptimize = R"({
  "mesh_cells": 16,
  "dirichlet_label": "xmin",
  "source": {"value": 1.0, "gradient": [0.3, -0.2]},
  "optimizer": {"max_iterations": 10, "step": 0.05, "lambda": 1.0, "gradient_tolerance": 1e-12},
  "svg_every": 1
})";

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Vec3 to_vec(const json& j, int dim, const char* what)
{
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(std::string(what) + " must be an array of " + std::to_string(dim) + " numbers");
    Vec3 v = Vec3::Zero();
    for (int a = 0; a < dim; ++a) v[a] = j[a].get<double>();
    return v;
}

void write_out(const RunConfig& cfg, const std::string& name, const std::string& content)
{
    write_text_file_atomic((cfg.out_dir / name).string(), content);
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

// ---- check-dj1 / check-dj2

struct ResolvedCase {
    std::string name;
    std::vector<suites::Instance> instances;
};

std::vector<ResolvedCase> resolve_cases(const RunConfig& cfg)
{
    std::vector<ResolvedCase> out;
    const json& cases = cfg.doc.at("cases");
    if (!cases.is_array()) throw ConfigError("'cases' must be an array");
    for (size_t k = 0; k < cases.size(); ++k) {
        const json& c = cases[k];
        ResolvedCase rc;
        rc.name = c.value("name", "case" + std::to_string(k));
        const std::uint64_t seed = cfg.seed * 1000003ull + k;
        if (c.contains("random")) {
            const json& r = c["random"];
            const int dim = r.value("dim", 2);
            if (dim != 2 && dim != 3) throw ConfigError("random case dim must be 2 or 3");
            rc.instances = suites::random_instances(dim, r.value("cells", dim == 2 ? 4 : 3), r.value("count", 1), seed,
                                                    r.value("f_degree", 2));
            for (auto& inst : rc.instances) inst.id = rc.name + "-" + inst.id;
        } else {
            auto mesh = resolve_mesh(c.at("mesh"), cfg.config_dir);
            auto phi = resolve_level_set(c.at("level_set"), mesh, cfg.config_dir);
            suites::Rng rng(seed);
            auto f = resolve_field(c.value("field", json{{"kind", "constant"}, {"value", 1.0}}), mesh, rng);
            std::vector<int> nodes;
            const json& nj = c.value("nodes", json("band"));
            if (nj.is_string() && (nj == "band" || nj == "random")) {
                for (int v = 0; v < mesh->num_vertices(); ++v) {
                    const HatPerturbation w{v};
                    const auto signs = effective_signs(phi, w, Side::FromAbove);
                    for (int cell : w.support_cells(*mesh))
                        if (is_sign_cut(*mesh, cell, signs)) {
                            nodes.push_back(v);
                            break;
                        }
                }
                if (nj == "random" && !nodes.empty()) nodes = {nodes[rng.index(static_cast<int>(nodes.size()))]};
            } else if (nj.is_array()) {
                for (const auto& v : nj) {
                    const int n = v.get<int>();
                    if (n < 0 || n >= mesh->num_vertices())
                        throw ConfigError("node " + std::to_string(n) + " is not a vertex of the mesh");
                    nodes.push_back(n);
                }
            } else {
                throw ConfigError("'nodes' must be \"band\", \"random\" or a list of vertex indices");
            }
            for (int v : nodes)
                rc.instances.push_back(suites::Instance{rc.name + "-node" + std::to_string(v), mesh, phi,
                                                        HatPerturbation{v}, f});
        }
        out.push_back(std::move(rc));
    }
    return out;
}

int cmd_check_dj(const RunConfig& cfg, std::ostream& log)
{
    const auto which = cfg.command == "check-dj1" ? suites::Functional::Volume : suites::Functional::Surface;
    const auto cases = guarded("resolving cases", [&] { return resolve_cases(cfg); });
    const auto ladder = guarded("resolving ladder", [&] { return resolve_ladder(cfg.doc); });
    const bool svg = cfg.doc.value("svg", true);

    std::string csv = "case,instance,dim,node,side,t,quotient,reference,error,fitted_order,two_sided_agree,passed\n";
    json derivs = json::array();
    int failures = 0, total = 0;
    for (const auto& rc : cases) {
        if (rc.instances.empty()) log << "no-op: case " << rc.name << " has no hat support meeting the boundary\n";
        for (const auto& inst : rc.instances) {
            const auto r = suites::taylor_check(which, inst, ladder, cfg.negative_control);
            ++total;
            failures += !r.passed;
            const std::string order = r.report.exact ? "exact" : num(r.report.fitted_order);
            for (size_t i = 0; i < r.report.t_values.size(); ++i)
                csv += rc.name + "," + inst.id + "," + std::to_string(r.dim) + "," + std::to_string(r.node)
                       + ",from_above," + num(r.report.t_values[i]) + "," + num(r.report.quotients[i]) + ","
                       + num(r.report.reference) + "," + num(r.report.errors[i]) + "," + order + ","
                       + (r.two_sided_agree ? "1" : "0") + "," + (r.passed ? "1" : "0") + "\n";
            derivs.push_back({{"case", rc.name},
                              {"instance", inst.id},
                              {"node", r.node},
                              {"from_above", json::parse(r.above.to_json())},
                              {"from_below", json::parse(r.below.to_json())}});
            log << (r.passed ? "[PASS] " : "[FAIL] ") << inst.id << " node " << r.node;
            if (r.no_op)
                log << "  no-op: supp w ∩ Ω = ∅ or misses the boundary\n";
            else
                log << "  reference " << short_num(r.report.reference) << "  order "
                    << (r.report.exact ? std::string("exact") : short_num(r.report.fitted_order))
                    << (r.above.two_sided ? (r.two_sided_agree ? "  two-sided agree" : "  two-sided DISAGREE")
                                          : "  aligned, one-sided")
                    << "\n";
            if (svg) {
                if (inst.mesh->dim() == 2) {
                    SvgOverlays ov;
                    ov.hat = inst.w;
                    ov.face_values = r.above.face_contributions;
                    ov.title = inst.id;
                    write_out(cfg, cfg.command + "_" + inst.id + ".svg", render_svg(inst.phi, ov));
                } else {
                    write_out(cfg, cfg.command + "_" + inst.id + "_geometry.json", cut_geometry_json(inst.phi));
                }
            }
        }
    }
    write_out(cfg, cfg.command + ".csv", csv);
    write_out(cfg, cfg.command + "_derivatives.json", derivs.dump(1));
    log << cfg.command << ": " << (total - failures) << "/" << total << " instances passed\n";
    return failures == 0 ? 0 : 1;
}

// ---- check-identities

int cmd_check_identities(const RunConfig& cfg, std::ostream& log)
{
    const auto& doc = cfg.doc;
    const int count = guarded("count", [&] { return doc.value("count", 10); });
    const auto dims = guarded("dims", [&] { return doc.value("dims", std::vector<int>{2, 3}); });
    const auto checks = guarded("checks", [&] { return doc.at("checks").get<std::vector<std::string>>(); });
    for (int d : dims)
        if (d != 2 && d != 3) throw ConfigError("dims entries must be 2 or 3");
    static const std::vector<std::string> known{"layer_strip", "ibp_smooth",         "ibp_jump", "ibp_fitted",
                                                "jacobian",    "energy",             "partition_of_unity",
                                                "aligned",     "topological",        "fitted_equivalence"};
    for (const auto& c : checks)
        if (std::find(known.begin(), known.end(), c) == known.end()) throw ConfigError("unknown check '" + c + "'");

    const bool neg = cfg.negative_control;
    const std::uint64_t s = cfg.seed;
    std::vector<suites::CheckLine> lines;
    for (const auto& c : checks) {
        if (c == "aligned") {
            lines.push_back(suites::aligned_one_sided(neg));
            continue;
        }
        if (c == "fitted_equivalence") {
            lines.push_back(suites::fitted_equivalence(count, s, neg));
            continue;
        }
        if (c == "energy") {
            // one solve per regime on the demo geometry, plus whatever ran before
            auto fm = suites::fitted_demo_mesh(1);
            suites::tracked_solve_fitted(fm, suites::demo_source(), "xmin");
            auto cm = suites::cut_demo_mesh(16);
            suites::tracked_solve_cut(cm, suites::cut_demo_level_set(cm), suites::demo_source(), "xmin");
            const auto& st = suites::solve_stats();
            suites::CheckLine l{"energy identity over all solves", st.max_energy_gap + (neg ? 1e-6 : 0.0), 1e-10,
                                false, std::to_string(st.count) + " solves"};
            l.passed = l.value <= l.tolerance;
            lines.push_back(l);
            continue;
        }
        for (int d : dims) {
            const std::uint64_t sd = s * 31 + d;
            if (c == "layer_strip") lines.push_back(suites::layer_vs_strip(d, count, sd, neg));
            if (c == "ibp_smooth") lines.push_back(suites::ibp_dilation(d, true, count, sd, neg));
            if (c == "ibp_jump") lines.push_back(suites::ibp_dilation(d, false, count, sd, neg));
            if (c == "ibp_fitted") lines.push_back(suites::ibp_fitted_random(d, count, sd, neg));
            if (c == "jacobian") lines.push_back(suites::jacobian_fd(d, sd, neg));
            if (c == "partition_of_unity") lines.push_back(suites::partition_of_unity(d, sd, neg));
            if (c == "topological") lines.push_back(suites::topological_fd(d, sd, neg));
        }
    }
    if (lines.empty()) log << "no-op: no identity checks selected\n";
    std::string csv = "check,value,tolerance,passed,detail\n";
    int failures = 0;
    for (const auto& l : lines) {
        failures += !l.passed;
        csv += "\"" + l.name + "\"," + num(l.value) + "," + num(l.tolerance) + "," + (l.passed ? "1" : "0") + ",\""
               + l.detail + "\"\n";
        log << (l.passed ? "[PASS] " : "[FAIL] ") << l.name << "  value " << short_num(l.value) << "  tolerance "
            << short_num(l.tolerance) << "  (" << l.detail << ")\n";
    }
    write_out(cfg, "check_identities.csv", csv);
    return failures == 0 ? 0 : 1;
}

// ---- compare-fitted-unfitted

int cmd_compare(const RunConfig& cfg, std::ostream& log)
{
    const int levels = guarded("levels", [&] { return cfg.doc.value("levels", 3); });
    if (levels < 1 || levels > 5) throw ConfigError("levels must be between 1 and 5");
    const auto r = guarded("source", [&] { return resolve_source(cfg.doc.value("source", json::object())); });
    if (cfg.negative_control) log << "note: --negative-control has no effect on this command\n";
    std::vector<suites::GapRow> rows;
    try {
        rows = suites::compare_fitted_unfitted(levels, r);
    } catch (const SolverError& e) {
        log << "solver failure: " << e.what() << " (min cut fraction " << short_num(e.min_cut_fraction()) << ")\n";
        return 1;
    }
    std::string csv = "level,h,dj_continuous,dj_fitted_strong,gap,fd_fitted,cut_node,dj_cut,fd_cut,min_cut_fraction\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.level) + "," + num(row.h) + "," + num(row.continuous) + "," + num(row.strong) + ","
               + num(row.gap) + "," + num(row.fd_fitted) + "," + std::to_string(row.cut_node) + "," + num(row.dj_cut)
               + "," + num(row.fd_cut) + "," + num(row.min_cut_fraction) + "\n";
        log << "level " << row.level << "  h " << short_num(row.h) << "  continuous " << short_num(row.continuous)
            << "  discrete " << short_num(row.strong) << "  gap " << short_num(row.gap) << "  cut node "
            << row.cut_node << " dJ " << short_num(row.dj_cut) << " (FD " << short_num(row.fd_cut) << ")\n";
    }
    write_out(cfg, "compare_fitted_unfitted.csv", csv);
    if (rows.size() < 2) {
        log << "single level: monotonicity not checked\n";
        return 0;
    }
    const bool ok = suites::gaps_decrease(rows);
    log << (ok ? "[PASS] " : "[FAIL] ") << "continuous/discrete gap decreases under refinement\n";
    return ok ? 0 : 1;
}

// ---- optimize

int cmd_optimize(const RunConfig& cfg, std::ostream& log)
{
    const auto& doc = cfg.doc;
    MeshPtr mesh;
    LevelSetFunction phi;
    suites::OptimizerSettings st;
    AffineSource r;
    std::string label;
    int svg_every = 1;
    guarded("optimizer config", [&] {
        mesh = doc.contains("mesh") ? resolve_mesh(doc["mesh"], cfg.config_dir)
                                    : suites::cut_demo_mesh(doc.value("mesh_cells", 16));
        phi = doc.contains("level_set") ? resolve_level_set(doc["level_set"], mesh, cfg.config_dir)
                                        : suites::cut_demo_level_set(mesh);
        r = resolve_source(doc.value("source", json::object()));
        label = doc.value("dirichlet_label", "xmin");
        svg_every = doc.value("svg_every", 1);
        const json o = doc.value("optimizer", json::object());
        st.max_iterations = o.value("max_iterations", st.max_iterations);
        st.step = o.value("step", st.step);
        st.lambda = o.value("lambda", st.lambda);
        st.gradient_tolerance = o.value("gradient_tolerance", st.gradient_tolerance);
        if (o.contains("target_volume") && !o["target_volume"].is_null()) st.target_volume = o["target_volume"].get<double>();
        return 0;
    });
    if (mesh->dim() != 2) throw ConfigError("the optimizer demo is 2D only");
    if (mesh->faces_with_label(label).empty()) throw ConfigError("no boundary face carries label '" + label + "'");
    if (st.max_iterations < 0 || !(st.step > 0.0)) throw ConfigError("max_iterations must be >= 0 and step > 0");
    if (cfg.negative_control) log << "note: --negative-control has no effect on this command\n";

    const auto run = suites::optimize(mesh, phi, r, label, st, [&](int it, const LevelSetFunction& p) {
        if (svg_every > 0 && it % svg_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "optimize_iter_%04d.svg", it);
            SvgOverlays ov;
            ov.title = "iteration " + std::to_string(it);
            write_out(cfg, name, render_svg(p, ov));
        }
    });
    std::string csv = "iteration,objective,compliance,volume,gradient_norm,step,min_cut_fraction,pattern_changed\n";
    bool monotone = true, stable = true;
    for (size_t i = 0; i < run.history.size(); ++i) {
        const auto& h = run.history[i];
        csv += std::to_string(h.iteration) + "," + num(h.objective) + "," + num(h.compliance) + "," + num(h.volume)
               + "," + num(h.gradient_norm) + "," + num(h.step) + "," + num(h.min_cut_fraction) + ","
               + (h.pattern_changed ? "1" : "0") + "\n";
        if (i > 0 && h.objective > run.history[i - 1].objective) monotone = false;
        stable = stable && !h.pattern_changed;
        log << "iteration " << h.iteration << "  objective " << num(h.objective) << "  volume " << short_num(h.volume)
            << "  |g| " << short_num(h.gradient_norm) << "  step " << short_num(h.step) << "\n";
    }
    write_out(cfg, "optimize.csv", csv);
    if (run.failed) {
        log << "solver failure: " << run.error << "\n";
        return 1;
    }
    log << "objective non-increasing: " << (monotone ? "yes" : "no") << ", cut pattern kept within steps: "
        << (stable ? "yes" : "no") << "\n";
    return 0;
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"check-dj1", "check-dj2", "check-identities", "compare-fitted-unfitted",
                                                "optimize"};
    return names;
}

json default_config(const std::string& command)
{
    const char* text = nullptr;
    if (command == "check-dj1" || command == "check-dj2") text = kDefaultCheckDj;
    else if (command == "check-identities") text = kDefaultIdentities;
    else if (command == "compare-fitted-unfitted") text = kDefaultCompare;
    else if (command == "optimize") text = kDefaultOptimize;
    else throw ConfigError("unknown command '" + command + "'");
    json j = json::parse(text);
    j["command"] = command;
    j["seed"] = 1;
    return j;
}

RunConfig load_run_config(const std::string& command, const std::optional<fs::path>& config_path,
                          const std::optional<fs::path>& out_dir, const std::optional<std::uint64_t>& seed,
                          bool negative_control)
{
    RunConfig cfg;
    cfg.command = command;
    cfg.doc = default_config(command);
    if (config_path) {
        std::string text;
        try {
            text = read_text_file(config_path->string());
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(config_path->string() + ": " + e.what());
        }
        if (!doc.is_object()) throw ConfigError(config_path->string() + ": config must be a JSON object");
        if (doc.contains("command") && doc["command"] != command)
            throw ConfigError("config is for '" + doc["command"].get<std::string>() + "', not '" + command + "'");
        // fields missing from the file keep their bundled defaults
        cfg.doc.merge_patch(doc);
        cfg.config_dir = config_path->parent_path().empty() ? fs::path(".") : config_path->parent_path();
    }
    try {
        cfg.seed = seed ? *seed : cfg.doc.value("seed", std::uint64_t{1});
        cfg.out_dir = out_dir ? *out_dir : fs::path(cfg.doc.value("out", std::string("dilagrad-out")));
        cfg.negative_control = negative_control || cfg.doc.value("negative_control", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("seed/out/negative_control: ") + e.what());
    }
    return cfg;
}

MeshPtr resolve_mesh(const json& spec, const fs::path& base)
{
    return guarded("mesh", [&] {
        if (spec.contains("file")) {
            try {
                return make_shared_mesh(load_mesh_json((base / spec["file"].get<std::string>()).string()));
            } catch (const TopologyError& e) {
                throw ConfigError(std::string("mesh: ") + e.what());
            } catch (const std::runtime_error& e) {
                throw ConfigError(std::string("mesh: ") + e.what());
            }
        }
        const int dim = spec.at("dim").get<int>();
        if (dim != 2 && dim != 3) throw ConfigError("mesh dim must be 2 or 3");
        const auto cells = spec.at("cells").get<std::vector<int>>();
        const auto extent = spec.value("extent", std::vector<double>(dim, 1.0));
        const auto origin = spec.value("origin", std::vector<double>{});
        return make_shared_mesh(build_structured_mesh(dim, cells, extent, origin));
    });
}

LevelSetFunction resolve_level_set(const json& spec, MeshPtr mesh, const fs::path& base)
{
    return guarded("level_set", [&] {
        const int d = mesh->dim();
        const std::string kind = spec.at("kind").get<std::string>();
        if (kind == "plane") {
            const Vec3 n = to_vec(spec.at("normal"), d, "plane normal");
            if (n.norm() == 0.0) throw ConfigError("plane normal must be nonzero");
            const double off = spec.value("offset", 0.0);
            const Vec3 u = n.normalized();
            return sample_analytic(mesh, [=](const Vec3& x) { return u.dot(x) - off; });
        }
        if (kind == "sphere" || kind == "disk") {
            const Vec3 c = to_vec(spec.at("center"), d, "center");
            const double r = spec.at("radius").get<double>();
            return sample_analytic(mesh, [=](const Vec3& x) { return (x - c).norm() - r; });
        }
        if (kind == "ellipse" || kind == "ellipsoid") {
            const Vec3 c = to_vec(spec.at("center"), d, "center");
            Vec3 a = to_vec(spec.at("semi_axes"), d, "semi_axes");
            if (d == 2) a.z() = 1.0;
            return sample_analytic(mesh, [=](const Vec3& x) { return (x - c).cwiseQuotient(a).norm() - 1.0; });
        }
        if (kind == "box") {
            const Vec3 lo = to_vec(spec.at("lo"), d, "box lo"), hi = to_vec(spec.at("hi"), d, "box hi");
            return sample_analytic(mesh, [=](const Vec3& x) {
                double v = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < d; ++a) v = std::max({v, lo[a] - x[a], x[a] - hi[a]});
                return v;
            });
        }
        if (kind == "values") return LevelSetFunction(mesh, spec.at("nodal_values").get<std::vector<double>>());
        if (kind == "file") {
            try {
                return LevelSetFunction(mesh, load_nodal_values_json((base / spec.at("path").get<std::string>()).string(),
                                                                     mesh->num_vertices()));
            } catch (const std::runtime_error& e) {
                throw ConfigError(std::string("level_set: ") + e.what());
            }
        }
        throw ConfigError("unknown level_set kind '" + kind + "'");
    });
}

PiecewiseField resolve_field(const json& spec, MeshPtr mesh, suites::Rng& rng)
{
    return guarded("field", [&] {
        const std::string kind = spec.value("kind", "constant");
        if (kind == "constant") return PiecewiseField::constant(mesh, spec.value("value", 1.0));
        if (kind == "linear") {
            const double v = spec.value("value", 0.0);
            const Vec3 g = to_vec(spec.at("gradient"), mesh->dim(), "gradient");
            return PiecewiseField::from_global(mesh, 1, [=](const Vec3& x) { return v + g.dot(x); });
        }
        if (kind == "random") {
            const int deg = spec.value("degree", 2);
            if (deg < 0 || deg > kMaxFieldDegree) throw ConfigError("random field degree out of range");
            return spec.value("smooth", false) ? suites::random_smooth_field(mesh, deg, rng)
                                               : suites::random_piecewise_field(mesh, deg, rng);
        }
        throw ConfigError("unknown field kind '" + kind + "'");
    });
}

suites::LadderSpec resolve_ladder(const json& doc)
{
    suites::LadderSpec spec;
    if (!doc.contains("ladder")) return spec;
    const json& l = doc["ladder"];
    if (l.contains("t")) {
        spec.explicit_t = l["t"].get<std::vector<double>>();
        for (size_t i = 0; i < spec.explicit_t.size(); ++i)
            if (!(spec.explicit_t[i] > 0.0) || (i > 0 && !(spec.explicit_t[i] < spec.explicit_t[i - 1])))
                throw ConfigError("ladder t values must be positive and strictly decreasing");
    }
    spec.k_min = l.value("k_min", spec.k_min);
    spec.k_max = l.value("k_max", spec.k_max);
    if (spec.explicit_t.empty() && (spec.k_min > spec.k_max || spec.k_max - spec.k_min < 1))
        throw ConfigError("ladder needs k_min < k_max");
    return spec;
}

AffineSource resolve_source(const json& spec)
{
    AffineSource r = suites::demo_source();
    if (spec.contains("value")) r.value = spec["value"].get<double>();
    if (spec.contains("gradient")) r.gradient = to_vec(spec["gradient"], 2, "source gradient");
    return r;
}

int run_command(const RunConfig& cfg, std::ostream& log)
{
    if (cfg.command == "check-dj1" || cfg.command == "check-dj2") return cmd_check_dj(cfg, log);
    if (cfg.command == "check-identities") return cmd_check_identities(cfg, log);
    if (cfg.command == "compare-fitted-unfitted") return cmd_compare(cfg, log);
    if (cfg.command == "optimize") return cmd_optimize(cfg, log);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

std::string csv_column_help()
{
    return "CSV columns:\n"
           "  check-dj1/check-dj2 -> <cmd>.csv: case,instance,dim,node,side,t,quotient,reference,error,fitted_order,"
           "two_sided_agree,passed\n"
           "  check-identities -> check_identities.csv: check,value,tolerance,passed,detail\n"
           "  compare-fitted-unfitted -> compare_fitted_unfitted.csv: level,h,dj_continuous,dj_fitted_strong,gap,"
           "fd_fitted,cut_node,dj_cut,fd_cut,min_cut_fraction\n"
           "  optimize -> optimize.csv: iteration,objective,compliance,volume,gradient_norm,step,min_cut_fraction,"
           "pattern_changed\n";
}

} // namespace dilagrad
