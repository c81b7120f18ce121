#pragma once

#include "otguide/diagnostics.hpp"

#include <string>
#include <vector>

namespace otguide {

struct QuiverOptions {
    // Arrows are drawn from phi(u_i) to phi(u_i) - arrow_scale * w_i. A value
    // <= 0 picks the scale that makes the longest arrow 15% of the plotted
    // range; the factor actually used is written into the SVG metadata.
    double arrow_scale = 0.0;
    int panel_size = 420;
};

/// Cost-plane quiver plot of a tangent report as a standalone SVG 1.1
/// document: one panel per pair of prompts (a single panel for m = 2, three
/// for m = 3). Throws ArgumentError for m < 2.
std::string render_tangent_svg(const TangentReport& report,
                               const std::vector<std::string>& prompt_labels,
                               const QuiverOptions& options = {});

}  // namespace otguide
