#pragma once

#include "dilagrad/levelset.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dilagrad {

struct SvgOverlays {
    std::optional<HatPerturbation> hat; ///< tints supp w and marks its center
    bool highlight_aligned = true;
    /// Per-face values (e.g. jump contributions); line width scales with |value|.
    std::vector<std::pair<int, double>> face_values;
    std::string title;
};

/// Static picture of a 2D cut configuration. Output depends only on the
/// inputs. Throws UnsupportedError in 3D.
std::string render_svg(const LevelSetFunction& phi, const SvgOverlays& overlays = {});

} // namespace dilagrad
