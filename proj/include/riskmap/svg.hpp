#pragma once

#include <string>
#include <vector>

#include "riskmap/embedding.hpp"

namespace riskmap {

struct SvgOptions {
  bool show_labels = false;  // draw region_id next to each point
  int width = 800;
  int height = 600;
  double point_radius = 4.0;
};

// Scatter of the embedding, points colored by cluster from a fixed 10-color
// palette, axes auto-scaled with 5% margins. Output bytes are a pure function
// of the inputs.
std::string render_svg(const Embedding& embedding, const std::vector<int>& clusters,
                       const SvgOptions& options = {});

}  // namespace riskmap
