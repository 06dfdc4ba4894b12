#include "amrl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "amrl/csv.hpp"

namespace amrl::svg {

namespace {

constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;

std::string escape(const std::string& s) {
  std::string out;
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

std::string num(double v) { return format_number(v, 6); }

// Round step (1, 2 or 5 times a power of ten) giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void render_panel(std::ostringstream& os, const Panel& panel, double x0, double w, double h) {
  Range xr;
  Range yr;
  for (const Series& s : panel.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xr.add(s.x[i]);
      const double d = i < s.spread.size() ? s.spread[i] : 0.0;
      yr.add(s.y[i] - d);
      yr.add(s.y[i] + d);
    }
  }
  xr.finish();
  yr.finish();
  const double pw = w - kLeft - kRight;
  const double ph = h - kTop - kBottom;
  auto px = [&](double x) { return x0 + kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  os << "<g>\n";
  os << "<text x=\"" << num(x0 + w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(panel.title) << "</text>\n";
  os << "<rect x=\"" << num(x0 + kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double ys = nice_step(yr.hi - yr.lo, 5);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + ys * 1e-9; t += ys) {
    os << "<line x1=\"" << num(x0 + kLeft) << "\" x2=\"" << num(x0 + kLeft + pw) << "\" y1=\""
       << num(py(t)) << "\" y2=\"" << num(py(t)) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(x0 + kLeft - 6) << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\" font-size=\"10\">" << num(std::abs(t) < ys * 1e-9 ? 0.0 : t)
       << "</text>\n";
  }
  const double xs = nice_step(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + xs * 1e-9; t += xs) {
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 16)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << num(t) << "</text>\n";
  }
  os << "<text x=\"" << num(x0 + kLeft + pw / 2) << "\" y=\"" << num(h - 10)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.x_label) << "</text>\n";
  os << "<text transform=\"translate(" << num(x0 + 16) << "," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.y_label)
     << "</text>\n";

  for (const Series& s : panel.series) {
    if (s.x.empty()) {
      continue;
    }
    if (s.spread.size() == s.x.size()) {
      os << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << num(px(s.x[i])) << ',' << num(py(s.y[i] + s.spread[i])) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        os << num(px(s.x[i])) << ',' << num(py(s.y[i] - s.spread[i])) << ' ';
      }
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    os << "\"><title>" << escape(s.label) << "</title></polyline>\n";
  }

  double ly = kTop + 14;
  for (const Series& s : panel.series) {
    const double lx = x0 + kLeft + pw - 150;
    os << "<line x1=\"" << num(lx) << "\" x2=\"" << num(lx + 20) << "\" y1=\"" << num(ly - 4)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    os << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\" font-size=\"11\">"
       << escape(s.label) << "</text>\n";
    ly += 16;
  }
  os << "</g>\n";
}

}  // namespace

std::string render(const std::vector<Panel>& panels, double panel_width, double panel_height) {
  std::ostringstream os;
  const double width = panel_width * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(panel_height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(panel_height)
     << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(os, panels[i], panel_width * static_cast<double>(i), panel_width, panel_height);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace amrl::svg
