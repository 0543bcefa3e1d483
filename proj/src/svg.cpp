#include "mtm/svg.hpp"

#include "mtm/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mtm {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fixed(double v, int digits = 2)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s)
{
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

struct Range
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v)
  {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void pad()
  {
    if (hi - lo < 1e-12) {
      const double half = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= half;
      hi += half;
    }
  }
};

} // namespace

std::string render_svg(const std::vector<Series>& series, const ChartLabels& labels)
{
  Range xr;
  Range yr;
  std::size_t total = 0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y))
        continue;
      xr.add(x);
      yr.add(y);
      ++total;
    }
  }
  if (total == 0)
    throw InvalidConfiguration("svg chart has no finite data points");
  xr.pad();
  yr.pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">"
     << escape(labels.title) << "</text>\n";
  os << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\"" << fixed(kLeft + plot_w)
     << "\" y2=\"" << fixed(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(kLeft) << "\" y2=\""
     << fixed(kTop + plot_h) << "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(kTop + plot_h + 20)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << tick_label(xv) << "</text>\n";
    os << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(py(yv) + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << tick_label(yv) << "</text>\n";
  }
  os << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 20)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(labels.x_axis) << "</text>\n";
  os << "<text x=\"20\" y=\"" << fixed(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"14\" "
     << "transform=\"rotate(-90 20 " << fixed(kTop + plot_h / 2) << ")\">" << escape(labels.y_axis) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y))
        continue;
      os << (first ? "" : " ") << fixed(px(x)) << ',' << fixed(py(y));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 20.0 * static_cast<double>(i) + 10.0;
    os << "<line x1=\"" << fixed(kWidth - kRight + 20) << "\" y1=\"" << fixed(ly) << "\" x2=\""
       << fixed(kWidth - kRight + 45) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fixed(kWidth - kRight + 50) << "\" y=\"" << fixed(ly + 4) << "\" font-size=\"12\">"
       << escape(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_svg(const std::vector<Series>& series, const ChartLabels& labels, const std::filesystem::path& path)
{
  const std::string svg = render_svg(series, labels);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out << svg;
  if (!out)
    throw Error("failed while writing " + path.string());
}

} // namespace mtm
