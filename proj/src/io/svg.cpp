#include "sshc/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sshc/io/format.hpp"

namespace sshc::io {

namespace {

constexpr int margin_left = 80;
constexpr int margin_right = 20;
constexpr int margin_top = 36;
constexpr int margin_bottom = 52;

std::string px(double v) { return format_fixed(v, 2); }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo <= 0) {
      const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    }
  }
};

/// 1, 2 or 5 times a power of ten giving about `count` intervals.
double nice_step(double span, int count) {
  const double raw = span / count;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * base >= raw) return m * base;
  }
  return 10.0 * base;
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string render_svg(const std::vector<Panel>& panels, int width, int panel_height) {
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(panels.size(), 1));
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double top = static_cast<double>(p) * panel_height;
    const double x0 = margin_left;
    const double x1 = width - margin_right;
    const double y0 = top + panel_height - margin_bottom;
    const double y1 = top + margin_top;

    Range xr, yr;
    for (const auto& s : panel.series) {
      for (double v : s.x) xr.include(v);
      for (double v : s.y) yr.include(v);
    }
    xr.finish();
    yr.finish();
    auto sx = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto sy = [&](double v) { return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

    out += "<g>\n";
    out += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" + px(top + 22) + "\" text-anchor=\"middle\" font-size=\"14\">" +
           xml_escape(panel.title) + "</text>\n";
    out += "<rect x=\"" + px(x0) + "\" y=\"" + px(y1) + "\" width=\"" + px(x1 - x0) + "\" height=\"" + px(y0 - y1) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xstep = nice_step(xr.hi - xr.lo, 5);
    for (double v = std::ceil(xr.lo / xstep) * xstep; v <= xr.hi + xstep * 1e-9; v += xstep) {
      const double tick = std::abs(v) < xstep * 1e-9 ? 0.0 : v;
      out += "<line x1=\"" + px(sx(tick)) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(sx(tick)) + "\" y2=\"" +
             px(y0 + 5) + "\" stroke=\"black\"/>\n";
      out += "<text x=\"" + px(sx(tick)) + "\" y=\"" + px(y0 + 18) + "\" text-anchor=\"middle\">" +
             format_sig(tick, 4) + "</text>\n";
    }
    const double ystep = nice_step(yr.hi - yr.lo, 5);
    for (double v = std::ceil(yr.lo / ystep) * ystep; v <= yr.hi + ystep * 1e-9; v += ystep) {
      const double tick = std::abs(v) < ystep * 1e-9 ? 0.0 : v;
      out += "<line x1=\"" + px(x0 - 5) + "\" y1=\"" + px(sy(tick)) + "\" x2=\"" + px(x1) + "\" y2=\"" +
             px(sy(tick)) + "\" stroke=\"#dddddd\"/>\n";
      out += "<text x=\"" + px(x0 - 8) + "\" y=\"" + px(sy(tick) + 4) + "\" text-anchor=\"end\">" +
             format_sig(tick, 4) + "</text>\n";
    }
    out += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" + px(y0 + 40) + "\" text-anchor=\"middle\">" +
           xml_escape(panel.x_label) + "</text>\n";
    out += "<text x=\"" + px(18) + "\" y=\"" + px((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
           px(18) + " " + px((y0 + y1) / 2) + ")\">" + xml_escape(panel.y_label) + "</text>\n";

    double legend_y = y1 + 16;
    for (const auto& s : panel.series) {
      const std::size_t n = std::min(s.x.size(), s.y.size());
      if (s.line && n > 1) {
        out += "<polyline fill=\"none\" stroke=\"" + xml_escape(s.color) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
          if (i) out += ' ';
          out += px(sx(s.x[i])) + "," + px(sy(s.y[i]));
        }
        out += "\"/>\n";
      }
      if (s.markers) {
        for (std::size_t i = 0; i < n; ++i) {
          out += "<circle cx=\"" + px(sx(s.x[i])) + "\" cy=\"" + px(sy(s.y[i])) + "\" r=\"3\" fill=\"" +
                 xml_escape(s.color) + "\"/>\n";
        }
      }
      if (!s.label.empty()) {
        out += "<line x1=\"" + px(x0 + 10) + "\" y1=\"" + px(legend_y - 4) + "\" x2=\"" + px(x0 + 30) + "\" y2=\"" +
               px(legend_y - 4) + "\" stroke=\"" + xml_escape(s.color) + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + px(x0 + 36) + "\" y=\"" + px(legend_y) + "\">" + xml_escape(s.label) + "</text>\n";
        legend_y += 16;
      }
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sshc::io
