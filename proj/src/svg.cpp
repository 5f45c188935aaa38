#include "riskmap/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace riskmap {

namespace {

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Embedding& embedding, const std::vector<int>& clusters,
                       const SvgOptions& options) {
  const std::size_t n = embedding.n();
  if (n == 0) throw std::invalid_argument("empty embedding");
  if (!clusters.empty() && clusters.size() != n) {
    throw std::invalid_argument("cluster labels length mismatch");
  }

  double min_x = embedding.coords(0, 0), max_x = min_x;
  double min_y = embedding.coords(0, 1), max_y = min_y;
  for (std::size_t i = 1; i < n; ++i) {
    min_x = std::min(min_x, embedding.coords(i, 0));
    max_x = std::max(max_x, embedding.coords(i, 0));
    min_y = std::min(min_y, embedding.coords(i, 1));
    max_y = std::max(max_y, embedding.coords(i, 1));
  }
  double span_x = max_x - min_x;
  double span_y = max_y - min_y;
  if (span_x <= 0.0) span_x = 1.0;
  if (span_y <= 0.0) span_y = 1.0;

  const double margin_x = 0.05 * options.width;
  const double margin_y = 0.05 * options.height;
  const double scale_x = (options.width - 2.0 * margin_x) / span_x;
  const double scale_y = (options.height - 2.0 * margin_y) / span_y;
  const auto px = [&](double x) { return margin_x + (x - min_x) * scale_x; };
  const auto py = [&](double y) { return options.height - margin_y - (y - min_y) * scale_y; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << ' ' << options.height
      << "\">\n"
      << "<rect width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"#ffffff\" stroke=\"#cccccc\"/>\n";

  for (std::size_t i = 0; i < n; ++i) {
    const int cluster = clusters.empty() ? 0 : clusters[i];
    const char* color = kPalette[((cluster % 10) + 10) % 10];
    out << "<circle cx=\"" << fmt(px(embedding.coords(i, 0))) << "\" cy=\""
        << fmt(py(embedding.coords(i, 1))) << "\" r=\"" << fmt(options.point_radius)
        << "\" fill=\"" << color << "\"/>\n";
    if (options.show_labels) {
      out << "<text x=\"" << fmt(px(embedding.coords(i, 0)) + options.point_radius + 2.0)
          << "\" y=\"" << fmt(py(embedding.coords(i, 1)) + 4.0)
          << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#333333\">"
          << escape_xml(embedding.region_ids[i]) << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace riskmap
