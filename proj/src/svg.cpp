#include "latentflow/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "latentflow/errors.hpp"

namespace latentflow {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string tickLabel(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

SvgDocument::SvgDocument(double width, double height) : width_(width), height_(height) {
  rect(0, 0, width, height, "white");
}

void SvgDocument::rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
  body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
        << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
}

void SvgDocument::circle(double cx, double cy, double r, std::string_view fill, std::string_view stroke) {
  body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r) << "\" fill=\"" << fill
        << "\" stroke=\"" << stroke << "\"/>\n";
}

void SvgDocument::line(double x1, double y1, double x2, double y2, std::string_view stroke, double strokeWidth) {
  body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
        << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(strokeWidth) << "\"/>\n";
}

void SvgDocument::polyline(const std::vector<Eigen::Vector2d>& points, std::string_view stroke, double strokeWidth) {
  body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(strokeWidth) << "\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i)
    body_ << (i ? " " : "") << num(points[i].x()) << ',' << num(points[i].y());
  body_ << "\"/>\n";
}

void SvgDocument::text(double x, double y, std::string_view content, double size, std::string_view anchor) {
  body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << num(size)
        << "\" text-anchor=\"" << anchor << "\">" << xmlEscape(content) << "</text>\n";
}

std::string SvgDocument::str() const {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
      << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

void SvgDocument::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << str();
  if (!out) throw IoError("failed writing " + path.string());
}

double PlotFrame::px(double x) const { return left + (x - xMin) / (xMax - xMin) * width; }
double PlotFrame::py(double y) const { return top + height - (y - yMin) / (yMax - yMin) * height; }

void PlotFrame::fit(const Eigen::Ref<const Eigen::VectorXd>& xs, const Eigen::Ref<const Eigen::VectorXd>& ys) {
  auto range = [](const Eigen::Ref<const Eigen::VectorXd>& v, double& lo, double& hi) {
    if (v.size() == 0) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    lo = v.minCoeff();
    hi = v.maxCoeff();
    double span = hi - lo;
    if (!(span > 1e-12)) span = std::max(std::abs(lo), 1.0);
    lo -= 0.05 * span;
    hi += 0.05 * span;
  };
  range(xs, xMin, xMax);
  range(ys, yMin, yMax);
}

void PlotFrame::drawAxes(SvgDocument& doc, std::string_view xLabel, std::string_view yLabel, int ticks) const {
  doc.rect(left, top, width, height, "none", "#444444");
  for (int i = 0; i <= ticks; ++i) {
    const double t = static_cast<double>(i) / ticks;
    const double xv = xMin + t * (xMax - xMin);
    const double yv = yMin + t * (yMax - yMin);
    doc.line(px(xv), top + height, px(xv), top + height + 4, "#444444");
    doc.text(px(xv), top + height + 16, tickLabel(xv), 10, "middle");
    doc.line(left - 4, py(yv), left, py(yv), "#444444");
    doc.text(left - 6, py(yv) + 3, tickLabel(yv), 10, "end");
  }
  doc.text(left + width / 2, top + height + 34, xLabel, 12, "middle");
  doc.text(14, top + height / 2, yLabel, 12, "middle");
}

std::string categoricalColor(int i) {
  static const std::array<const char*, 10> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const int n = static_cast<int>(palette.size());
  return palette[static_cast<std::size_t>(((i % n) + n) % n)];
}

std::string xmlEscape(std::string_view s) {
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

}  // namespace latentflow
