#include "dilagrad/mesh_io.hpp"

#include "dilagrad/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dilagrad {

using nlohmann::json;

namespace {

int line_of(const std::string& text, size_t byte)
{
    int line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

json parse_or_throw(const std::string& text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << what << ": JSON syntax error at line " << line_of(text, e.byte) << ": " << e.what();
        throw InvalidArgument(os.str());
    }
}

[[noreturn]] void schema_error(const std::string& msg) { throw InvalidArgument("mesh JSON: " + msg); }

} // namespace

Mesh parse_mesh_json(const std::string& text)
{
    const json j = parse_or_throw(text, "mesh JSON");
    if (!j.is_object()) schema_error("top level must be an object");
    if (!j.contains("dim") || !j["dim"].is_number_integer()) schema_error("missing integer field 'dim'");
    MeshData data;
    data.dim = j["dim"].get<int>();
    if (data.dim != 2 && data.dim != 3) schema_error("'dim' must be 2 or 3");
    if (!j.contains("vertices") || !j["vertices"].is_array()) schema_error("missing array field 'vertices'");
    if (!j.contains("cells") || !j["cells"].is_array()) schema_error("missing array field 'cells'");

    int idx = 0;
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || static_cast<int>(v.size()) != data.dim)
            schema_error("vertex " + std::to_string(idx) + " must have " + std::to_string(data.dim) + " coordinates");
        Vec3 p = Vec3::Zero();
        for (int i = 0; i < data.dim; ++i) {
            if (!v[i].is_number()) schema_error("vertex " + std::to_string(idx) + " has a non-numeric coordinate");
            p[i] = v[i].get<double>();
        }
        data.vertices.push_back(p);
        ++idx;
    }
    idx = 0;
    for (const auto& c : j["cells"]) {
        if (!c.is_array() || static_cast<int>(c.size()) != data.dim + 1)
            schema_error("cell " + std::to_string(idx) + " must have " + std::to_string(data.dim + 1) + " vertices");
        std::array<int, 4> cell{-1, -1, -1, -1};
        for (int i = 0; i <= data.dim; ++i) {
            if (!c[i].is_number_integer()) schema_error("cell " + std::to_string(idx) + " has a non-integer index");
            cell[i] = c[i].get<int>();
        }
        data.cells.push_back(cell);
        ++idx;
    }
    if (j.contains("boundary_markers")) {
        if (!j["boundary_markers"].is_object()) schema_error("'boundary_markers' must be an object");
        for (const auto& [key, val] : j["boundary_markers"].items()) {
            int f = 0;
            try {
                size_t pos = 0;
                f = std::stoi(key, &pos);
                if (pos != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                schema_error("boundary marker key '" + key + "' is not a face index");
            }
            if (!val.is_string()) schema_error("boundary marker for face " + key + " must be a string");
            data.boundary_markers[f] = val.get<std::string>();
        }
    }
    return compute_adjacency(std::move(data));
}

Mesh load_mesh_json(const std::string& path) { return parse_mesh_json(read_text_file(path)); }

std::string mesh_to_json(const Mesh& mesh)
{
    json j;
    j["dim"] = mesh.dim();
    j["vertices"] = json::array();
    for (const auto& v : mesh.vertices()) {
        json p = json::array();
        for (int i = 0; i < mesh.dim(); ++i) p.push_back(v[i]);
        j["vertices"].push_back(p);
    }
    j["cells"] = json::array();
    for (int c = 0; c < mesh.num_cells(); ++c) {
        json cell = json::array();
        for (int v : mesh.cell(c)) cell.push_back(v);
        j["cells"].push_back(cell);
    }
    j["boundary_markers"] = json::object();
    for (const auto& [f, label] : mesh.boundary_markers()) j["boundary_markers"][std::to_string(f)] = label;
    return j.dump(1);
}

std::vector<double> parse_nodal_values_json(const std::string& text, int num_vertices)
{
    const json j = parse_or_throw(text, "level-set JSON");
    if (!j.is_object() || !j.contains("nodal_values") || !j["nodal_values"].is_array())
        throw InvalidArgument("level-set JSON: missing array field 'nodal_values'");
    std::vector<double> out;
    for (const auto& v : j["nodal_values"]) {
        if (!v.is_number()) throw InvalidArgument("level-set JSON: non-numeric nodal value");
        out.push_back(v.get<double>());
    }
    if (static_cast<int>(out.size()) != num_vertices)
        throw InvalidArgument("level-set JSON: expected " + std::to_string(num_vertices) + " nodal values, got "
                              + std::to_string(out.size()));
    return out;
}

std::vector<double> load_nodal_values_json(const std::string& path, int num_vertices)
{
    return parse_nodal_values_json(read_text_file(path), num_vertices);
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content)
{
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write file '" + tmp.string() + "'");
        out << content;
        if (!out) throw InvalidArgument("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target);
}

} // namespace dilagrad
