#pragma once

// Minimal static SVG 1.1 line charts. Output depends only on the data, so
// identical inputs give byte-identical files.

#include <string>
#include <vector>

namespace sshc::io {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string xml_escape(const std::string& text);

/// Panels stacked vertically, sharing the width.
std::string render_svg(const std::vector<Panel>& panels, int width = 640, int panel_height = 360);

}  // namespace sshc::io
