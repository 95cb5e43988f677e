#include "vibrobot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vibrobot {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr std::size_t kMaxPoints = 1500;

std::string escape(const std::string& s) {
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

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo <= 1e-300 * std::max(1.0, std::abs(hi))) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    }
  }
};

// 1-2-5 tick spacing giving roughly `target` intervals.
double tick_step(const Range& r, int target) {
  const double raw = (r.hi - r.lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

}  // namespace

std::string render_svg(const Plot& plot, int width, int height) {
  const double left = 80, right = 20, top = 40, bottom = 55;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  Range xr, yr;
  for (const Series& s : plot.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: series '" + s.label + "' has mismatched x/y");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.settle();
  yr.settle();
  const double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(plot.title) << "</text>\n";

  // grid and tick labels
  const double xs = tick_step(xr, 8);
  for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
    const double x = px(v);
    o << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << top << "\" x2=\"" << fmt("%.2f", x)
      << "\" y2=\"" << top + ph << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << top + ph + 16
      << "\" text-anchor=\"middle\">" << fmt("%g", std::abs(v) < 1e-12 * xs ? 0.0 : v) << "</text>\n";
  }
  const double ys = tick_step(yr, 6);
  for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
    const double y = py(v);
    o << "<line x1=\"" << left << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\"" << left + pw
      << "\" y2=\"" << fmt("%.2f", y) << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << fmt("%.2f", y + 4)
      << "\" text-anchor=\"end\">" << fmt("%.4g", std::abs(v) < 1e-12 * ys ? 0.0 : v) << "</text>\n";
  }
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const std::size_t n = s.x.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + kMaxPoints - 1) / kMaxPoints);
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << fmt("%.2f", px(s.x[i])) << ',' << fmt("%.2f", py(s.y[i]));
      first = false;
    }
    if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.y[n - 1]))
      o << (first ? "" : " ") << fmt("%.2f", px(s.x[n - 1])) << ',' << fmt("%.2f", py(s.y[n - 1]));
    o << "\"/>\n";

    const double ly = top + 14 + 16.0 * k;
    o << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw - 130
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw - 124 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const Plot& plot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(plot);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace vibrobot
