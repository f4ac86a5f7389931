#pragma once

#include "dilagrad/mesh.hpp"

#include <string>
#include <vector>

namespace dilagrad {

/// Parses {"dim", "vertices", "cells", "boundary_markers"}. Parse errors and
/// schema violations are reported as InvalidArgument with a line number
/// where one is available; topology problems come from compute_adjacency.
Mesh parse_mesh_json(const std::string& text);
Mesh load_mesh_json(const std::string& path);
std::string mesh_to_json(const Mesh& mesh);

/// {"nodal_values": [...]}; the count must match `num_vertices`.
std::vector<double> parse_nodal_values_json(const std::string& text, int num_vertices);
std::vector<double> load_nodal_values_json(const std::string& path, int num_vertices);

std::string read_text_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_text_file_atomic(const std::string& path, const std::string& content);

} // namespace dilagrad
