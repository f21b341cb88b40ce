#include "casimir/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace casimir::svg {

namespace {

constexpr double width = 640, height = 440;
constexpr double left = 80, right = 20, top = 40, bottom = 60;
constexpr const char* palette[] = {"#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment.
std::string comment(const std::string& s) {
  std::string out = s;
  for (std::size_t p; (p = out.find("--")) != std::string::npos;) out.replace(p, 2, "- -");
  return out;
}

struct Scale {
  double lo, hi;
  bool log;
  double pixel_lo, pixel_hi;

  double operator()(double v) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

std::pair<double, double> padded(double lo, double hi, bool log) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return log ? std::pair{lo / 2.0, hi * 2.0} : std::pair{lo - pad, hi + pad};
  }
  if (log) return {lo / 1.1, hi * 1.1};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<double> ticks(double lo, double hi, bool log) {
  std::vector<double> out;
  if (log) {
    for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
      const double v = std::pow(10.0, e);
      if (v >= lo && v <= hi) out.push_back(v);
    }
    if (out.size() < 2) {
      out.clear();
      for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi))); ++e)
        for (double m : {1.0, 2.0, 5.0})
          if (const double v = m * std::pow(10.0, e); v >= lo && v <= hi) out.push_back(v);
    }
    return out;
  }
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::string frame(const Axes& axes, const Scale& sx, const Scale& sy, const std::string& provenance) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format("<!-- {} -->\n", comment(provenance));
  out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                     "font-family=\"sans-serif\" font-size=\"12\">\n", width, height);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", width / 2,
                     escape(axes.title));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                     top, width - left - right, height - top - bottom);
  for (double t : ticks(sx.lo, sx.hi, sx.log)) {
    const double x = sx(t);
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ccc\"/>\n", x, top,
                       height - bottom);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", x, height - bottom + 16, t);
  }
  for (double t : ticks(sy.lo, sy.hi, sy.log)) {
    const double y = sy(t);
    out += fmt::format("<line x1=\"{0}\" y1=\"{2:.2f}\" x2=\"{1}\" y2=\"{2:.2f}\" stroke=\"#ccc\"/>\n", left,
                       width - right, y);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, y + 4, t);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (left + width - right) / 2,
                     height - 16, escape(axes.x_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     (top + height - bottom) / 2, escape(axes.y_label));
  return out;
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series, const std::string& provenance) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  std::vector<Series> shown;
  for (const auto& s : series) {
    Series v{s.label, {}, {}};
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      double x = s.x[i], y = s.y[i];
      if (axes.log_x) x = std::abs(x);
      if (axes.log_y) y = std::abs(y);
      if ((axes.log_x && x == 0.0) || (axes.log_y && y == 0.0) || !std::isfinite(x) || !std::isfinite(y)) continue;
      v.x.push_back(x);
      v.y.push_back(y);
      xlo = std::min(xlo, x), xhi = std::max(xhi, x), ylo = std::min(ylo, y), yhi = std::max(yhi, y);
    }
    shown.push_back(std::move(v));
  }
  if (!std::isfinite(xlo)) xlo = axes.log_x ? 1.0 : 0.0, xhi = axes.log_x ? 10.0 : 1.0, ylo = xlo, yhi = xhi;
  const auto [x0, x1] = padded(xlo, xhi, axes.log_x);
  const auto [y0, y1] = padded(ylo, yhi, axes.log_y);
  const Scale sx{x0, x1, axes.log_x, left, width - right};
  const Scale sy{y0, y1, axes.log_y, height - bottom, top};

  std::string out = frame(axes, sx, sy, provenance);
  for (std::size_t k = 0; k < shown.size(); ++k) {
    const char* color = palette[k % std::size(palette)];
    std::string pts;
    for (std::size_t i = 0; i < shown[k].x.size(); ++i)
      pts += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", sx(shown[k].x[i]), sy(shown[k].y[i]));
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
    const double ly = top + 18 + 16 * static_cast<double>(k);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       width - right - 170, ly - 4, width - right - 150, color);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", width - right - 145, ly, escape(shown[k].label));
  }
  out += "</svg>\n";
  return out;
}

std::string histogram(const Axes& axes, const std::vector<double>& edges, const std::vector<int>& counts,
                      const std::string& provenance) {
  double xlo = edges.empty() ? 0.0 : edges.front();
  double xhi = edges.empty() ? 1.0 : edges.back();
  if (!(xhi > xlo)) {
    const double pad = xlo == 0.0 ? 1.0 : std::abs(xlo) * 0.01;
    xlo -= pad, xhi += pad;
  }
  const int peak = counts.empty() ? 1 : std::max(1, *std::max_element(counts.begin(), counts.end()));
  const Scale sx{xlo, xhi, false, left, width - right};
  const Scale sy{0.0, peak * 1.05, false, height - bottom, top};
  std::string out = frame(axes, sx, sy, provenance);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double a = edges.size() > i + 1 && edges[i + 1] > edges[i] ? sx(edges[i]) : left;
    const double b = edges.size() > i + 1 && edges[i + 1] > edges[i] ? sx(edges[i + 1]) : width - right;
    const double y = sy(counts[i]);
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" stroke=\"white\"/>\n",
                       a, y, std::max(b - a, 0.5), height - bottom - y, palette[0]);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace casimir::svg
