#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "fmtree/eval.hpp"

namespace fmtree {

namespace {

std::string xml_escape(const std::string& s) {
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

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double range, int target) {
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

} // namespace

std::string render_boxplot_svg(const std::vector<std::pair<std::string, BoxplotSummary>>& boxes,
                               const std::string& title) {
  constexpr double width_per_box = 120.0;
  constexpr double left = 80.0, right = 30.0, top = 50.0, bottom = 50.0, plot_h = 360.0;
  const double width = left + right + width_per_box * static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
  const double height = top + plot_h + bottom;

  double hi = 0.0;
  for (const auto& [_, b] : boxes) hi = std::max(hi, b.max);
  if (!(hi > 0.0)) hi = 1.0;
  const double step = nice_step(hi, 6);
  const double axis_max = std::ceil(hi / step) * step;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / axis_max); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
     << "</text>\n";

  // axis and grid
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
     << "\" stroke=\"black\"/>\n";
  for (double t = 0.0; t <= axis_max + 0.5 * step; t += step) {
    const double y = y_of(t);
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << std::setprecision(0) << t
       << std::setprecision(2) << "</text>\n";
  }

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& [name, b] = boxes[i];
    const double cx = left + width_per_box * (static_cast<double>(i) + 0.5);
    const double half = width_per_box * 0.25;
    os << "<g>\n";
    os << "<line x1=\"" << cx << "\" y1=\"" << y_of(b.whisker_high) << "\" x2=\"" << cx << "\" y2=\"" << y_of(b.q3)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << cx << "\" y1=\"" << y_of(b.q1) << "\" x2=\"" << cx << "\" y2=\"" << y_of(b.whisker_low)
       << "\" stroke=\"black\"/>\n";
    for (double w : {b.whisker_low, b.whisker_high}) {
      os << "<line x1=\"" << cx - half / 2 << "\" y1=\"" << y_of(w) << "\" x2=\"" << cx + half / 2 << "\" y2=\""
         << y_of(w) << "\" stroke=\"black\"/>\n";
    }
    os << "<rect x=\"" << cx - half << "\" y=\"" << y_of(b.q3) << "\" width=\"" << 2 * half << "\" height=\""
       << std::max(0.0, y_of(b.q1) - y_of(b.q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << cx - half << "\" y1=\"" << y_of(b.median) << "\" x2=\"" << cx + half << "\" y2=\""
       << y_of(b.median) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers) {
      os << "<circle cx=\"" << cx << "\" cy=\"" << y_of(o) << "\" r=\"3\" fill=\"none\" stroke=\"#d62728\"/>\n";
    }
    os << "<text x=\"" << cx << "\" y=\"" << top + plot_h + 20 << "\" text-anchor=\"middle\">" << xml_escape(name)
       << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace fmtree
