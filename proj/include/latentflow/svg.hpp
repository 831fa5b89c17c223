#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace latentflow {

/// Minimal SVG writer. Coordinates are printed with fixed precision so identical
/// inputs give byte-identical files.
class SvgDocument {
public:
  SvgDocument(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none");
  void circle(double cx, double cy, double r, std::string_view fill, std::string_view stroke = "none");
  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double strokeWidth = 1.0);
  void polyline(const std::vector<Eigen::Vector2d>& points, std::string_view stroke, double strokeWidth = 1.0);
  void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start");

  std::string str() const;
  void save(const std::filesystem::path& path) const;

private:
  double width_;
  double height_;
  std::ostringstream body_;
};

/// Maps data coordinates into a rectangular plot area (y axis pointing up).
struct PlotFrame {
  double left = 60.0;
  double top = 20.0;
  double width = 400.0;
  double height = 300.0;
  double xMin = 0.0, xMax = 1.0, yMin = 0.0, yMax = 1.0;

  double px(double x) const;
  double py(double y) const;
  /// Expands the data range to cover the values, with a small margin.
  void fit(const Eigen::Ref<const Eigen::VectorXd>& xs, const Eigen::Ref<const Eigen::VectorXd>& ys);
  void drawAxes(SvgDocument& doc, std::string_view xLabel, std::string_view yLabel, int ticks = 5) const;
};

/// Distinct color for category index i (cycles after ten).
std::string categoricalColor(int i);

/// Escapes &, <, > and quotes for use in SVG text.
std::string xmlEscape(std::string_view s);

}  // namespace latentflow
