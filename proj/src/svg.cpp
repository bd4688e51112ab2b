#include "jcas/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace jcas {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Axis {
  bool log = false;
  double lo = 0.0, hi = 1.0;

  double map(double v, double px_lo, double px_hi) const {
    const double a = log ? std::log10(v) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    const double t = h > l ? (a - l) / (h - l) : 0.5;
    return px_lo + t * (px_hi - px_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const int e0 = static_cast<int>(std::floor(std::log10(lo)));
      const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
      for (int e = e0; e <= e1; ++e) out.push_back(std::pow(10.0, e));
    } else {
      const double span = hi - lo;
      if (span <= 0.0) return {lo};
      const double raw = span / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
          step = mag * m;
          break;
        }
      const double start = std::ceil(lo / step) * step;
      for (double v = start; v <= hi + 1e-12 * span; v += step) out.push_back(v);
    }
    return out;
  }
};

std::string fmt_tick(double v) {
  std::ostringstream os;
  const double a = std::abs(v);
  if (v != 0.0 && (a >= 1e4 || a < 1e-3))
    os << std::scientific << v;
  else
    os << v;
  std::string s = os.str();
  if (const auto pos = s.find("e"); pos != std::string::npos) {
    // compact exponent like 1e-02 -> 1e-2
    std::string mant = s.substr(0, pos), exp = s.substr(pos + 1);
    while (mant.size() > 1 && mant.find('.') != std::string::npos &&
           (mant.back() == '0' || mant.back() == '.'))
      mant.pop_back();
    int e = std::stoi(exp);
    s = mant + "e" + std::to_string(e);
  }
  return s;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  if (series.empty()) throw std::invalid_argument("render_svg: no series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: x/y mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.logx && s.x[i] <= 0.0)
        throw std::invalid_argument("render_svg: non-positive x under log scale");
      if (spec.logy && s.y[i] <= 0.0)
        throw std::invalid_argument("render_svg: non-positive y under log scale");
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
      ++points;
    }
  }
  if (points == 0) throw std::invalid_argument("render_svg: series have no points");
  if (xmin == xmax) {
    xmin -= 0.5;
    xmax += 0.5;
    if (spec.logx) {
      xmin = std::max(xmin + 0.5, 1e-12) / 2.0;
      xmax = xmax * 1.5;
    }
  }
  if (ymin == ymax) {
    if (spec.logy) {
      ymin /= 2.0;
      ymax *= 2.0;
    } else {
      ymin -= 0.5;
      ymax += 0.5;
    }
  } else if (!spec.logy) {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  Axis xa{spec.logx, xmin, xmax}, ya{spec.logy, ymin, ymax};
  const double ml = 70, mr = 20, mt = spec.title.empty() ? 20 : 40, mb = 50;
  const double px0 = ml, px1 = spec.width - mr;
  const double py0 = spec.height - mb, py1 = mt;  // y grows downward in SVG

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
     << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
     << spec.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    os << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(spec.title)
       << "</text>\n";

  // grid + ticks
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : xa.ticks()) {
    if (t < xmin || t > xmax) continue;
    const double px = xa.map(t, px0, px1);
    os << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px << "\" y2=\"" << py1
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << py0 + 16 << "\" text-anchor=\"middle\">"
       << fmt_tick(t) << "</text>\n";
  }
  for (double t : ya.ticks()) {
    if (t < ymin || t > ymax) continue;
    const double y = ya.map(t, py0, py1);
    os << "<line x1=\"" << px0 << "\" y1=\"" << y << "\" x2=\"" << px1 << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px0 - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
       << fmt_tick(t) << "</text>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\"" << px1 - px0
     << "\" height=\"" << py0 - py1 << "\" fill=\"none\" stroke=\"#333\"/>\n";
  if (!spec.xlabel.empty())
    os << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << spec.height - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
       << escape_xml(spec.xlabel) << "</text>\n";
  if (!spec.ylabel.empty())
    os << "<text x=\"16\" y=\"" << (py0 + py1) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 16 " << (py0 + py1) / 2 << ")\">"
       << escape_xml(spec.ylabel) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << xa.map(s.x[i], px0, px1) << "," << ya.map(s.y[i], py0, py1) << " ";
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << "<circle cx=\"" << xa.map(s.x[i], px0, px1) << "\" cy=\""
         << ya.map(s.y[i], py0, py1) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
  }

  // legend
  double ly = py1 + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    if (series[si].label.empty()) continue;
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    os << "<line x1=\"" << px1 - 130 << "\" y1=\"" << ly << "\" x2=\"" << px1 - 110
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px1 - 104 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[si].label)
       << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec,
               const std::filesystem::path& path) {
  const std::string body = render_svg(series, spec);  // throws before the file exists
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << body;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace jcas
