#include "latentflow/raster.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "latentflow/errors.hpp"
#include "latentflow/image.hpp"

namespace latentflow {

namespace {

constexpr std::array<int, 4> kDr = {-1, 1, 0, 0};
constexpr std::array<int, 4> kDc = {0, 0, -1, 1};

// Labels 4-connected FLUID components; returns component count.
int labelFluid(const RasterDesign& raster, std::vector<int>& labels) {
  labels.assign(raster.pixelCount(), -1);
  int next = 0;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(raster.pixelCount()); ++start) {
    if (labels[start] >= 0 || raster.classes[start] != static_cast<std::uint8_t>(PixelClass::Fluid)) continue;
    labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int r = p / raster.width;
      const int c = p % raster.width;
      for (int k = 0; k < 4; ++k) {
        const int rr = r + kDr[k];
        const int cc = c + kDc[k];
        if (rr < 0 || rr >= raster.height || cc < 0 || cc >= raster.width) continue;
        const int q = rr * raster.width + cc;
        if (labels[q] < 0 && raster.classes[q] == static_cast<std::uint8_t>(PixelClass::Fluid)) {
          labels[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return next;
}

void putU16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void putU32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>(v >> 24)};
  out.write(b, 4);
}
std::uint32_t getUnsigned(std::istream& in, int bytes) {
  std::uint32_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("truncated raster set header");
    v |= static_cast<std::uint32_t>(c) << (8 * i);
  }
  return v;
}

}  // namespace

std::size_t RasterDesign::count(PixelClass c) const {
  return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), static_cast<std::uint8_t>(c)));
}

RasterDesign makeRaster(int width, int height, PixelClass fill) {
  if (width < 1 || height < 1) throw DomainError("raster dimensions must be positive");
  RasterDesign r;
  r.width = width;
  r.height = height;
  r.classes.assign(static_cast<std::size_t>(width) * height, static_cast<std::uint8_t>(fill));
  return r;
}

void deriveBoundary(RasterDesign& raster) {
  for (int r = 0; r < raster.height; ++r) {
    for (int c = 0; c < raster.width; ++c) {
      if (raster.at(r, c) == PixelClass::Fluid) continue;
      bool nearFluid = false;
      for (int k = 0; k < 4 && !nearFluid; ++k) {
        const int rr = r + kDr[k];
        const int cc = c + kDc[k];
        nearFluid = rr >= 0 && rr < raster.height && cc >= 0 && cc < raster.width &&
                    raster.at(rr, cc) == PixelClass::Fluid;
      }
      raster.set(r, c, nearFluid ? PixelClass::Boundary : PixelClass::Solid);
    }
  }
}

bool fluidSpansInletToOutlet(const RasterDesign& raster) {
  std::vector<int> labels;
  if (labelFluid(raster, labels) != 1) return false;
  bool inlet = false;
  bool outlet = false;
  for (int r = 0; r < raster.height; ++r) {
    inlet = inlet || raster.at(r, 0) == PixelClass::Fluid;
    outlet = outlet || raster.at(r, raster.width - 1) == PixelClass::Fluid;
  }
  return inlet && outlet;
}

RasterDesign keepSpanningFluid(const RasterDesign& raster) {
  std::vector<int> labels;
  const int components = labelFluid(raster, labels);
  std::vector<char> inlet(static_cast<std::size_t>(components), 0), outlet(static_cast<std::size_t>(components), 0);
  std::vector<std::size_t> size(static_cast<std::size_t>(components), 0);
  for (int r = 0; r < raster.height; ++r) {
    const int a = labels[static_cast<std::size_t>(r) * raster.width];
    const int b = labels[static_cast<std::size_t>(r) * raster.width + raster.width - 1];
    if (a >= 0) inlet[static_cast<std::size_t>(a)] = 1;
    if (b >= 0) outlet[static_cast<std::size_t>(b)] = 1;
  }
  for (int l : labels)
    if (l >= 0) ++size[static_cast<std::size_t>(l)];
  int best = -1;
  for (int k = 0; k < components; ++k)
    if (inlet[static_cast<std::size_t>(k)] && outlet[static_cast<std::size_t>(k)] &&
        (best < 0 || size[static_cast<std::size_t>(k)] > size[static_cast<std::size_t>(best)]))
      best = k;
  if (best < 0) throw InfeasibleGeometry("no fluid path connects inlet and outlet");
  RasterDesign out = raster;
  for (std::size_t p = 0; p < out.classes.size(); ++p)
    out.classes[p] = static_cast<std::uint8_t>(labels[p] == best ? PixelClass::Fluid : PixelClass::Solid);
  deriveBoundary(out);
  return out;
}

std::optional<std::string> checkRaster(const RasterDesign& raster) {
  if (raster.classes.size() != static_cast<std::size_t>(raster.width) * raster.height)
    return "class grid size differs from width x height";
  for (auto v : raster.classes)
    if (v > 2) return "pixel class code out of range";
  if (raster.count(PixelClass::Solid) + raster.count(PixelClass::Fluid) + raster.count(PixelClass::Boundary) !=
      raster.pixelCount())
    return "class counts do not partition the grid";
  RasterDesign rederived = raster;
  deriveBoundary(rederived);
  if (rederived.classes != raster.classes) return "boundary ring differs from fluid adjacency";
  if (!fluidSpansInletToOutlet(raster)) return "fluid is not one component spanning inlet to outlet";
  return std::nullopt;
}

RasterDesign rasterize(const FullGeometry& geometry, int resolution) {
  if (resolution < 16) throw DomainError("resolution must be at least 16");
  RasterDesign raster = makeRaster(resolution, resolution);
  for (int r = 0; r < resolution; ++r) {
    const double y = 1.0 - (r + 0.5) / resolution;
    for (int c = 0; c < resolution; ++c) {
      const double x = (c + 0.5) / resolution;
      if (geometry.isFluid({x, y})) raster.set(r, c, PixelClass::Fluid);
    }
  }
  if (raster.count(PixelClass::Fluid) == 0) throw InfeasibleGeometry("geometry has no fluid region");
  deriveBoundary(raster);
  if (!fluidSpansInletToOutlet(raster))
    throw ResolutionTooCoarse("fluid connectivity lost at " + std::to_string(resolution) + " px");
  raster.provenance.left.archetype = geometry.leftArchetype;
  raster.provenance.right.archetype = geometry.rightArchetype;
  return raster;
}

RasterDesign flipHorizontal(const RasterDesign& raster) {
  RasterDesign out = raster;
  for (int r = 0; r < raster.height; ++r)
    for (int c = 0; c < raster.width; ++c) out.set(r, c, raster.at(r, raster.width - 1 - c));
  std::swap(out.provenance.left, out.provenance.right);
  return out;
}

Eigen::RowVectorXd oneHot(const RasterDesign& raster) {
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(raster.pixelCount()) * kClassCount);
  for (std::size_t p = 0; p < raster.pixelCount(); ++p) v(static_cast<Eigen::Index>(p) * 3 + raster.classes[p]) = 1.0;
  return v;
}

Eigen::MatrixXd oneHotBatch(const std::vector<RasterDesign>& rasters) {
  if (rasters.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rasters.size()),
                    static_cast<Eigen::Index>(rasters.front().pixelCount()) * kClassCount);
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    if (rasters[i].pixelCount() != rasters.front().pixelCount()) throw DimensionMismatch("mixed raster sizes");
    m.row(static_cast<Eigen::Index>(i)) = oneHot(rasters[i]);
  }
  return m;
}

RasterDesign argmaxRaster(const Eigen::Ref<const Eigen::RowVectorXd>& encoded, int width, int height) {
  if (encoded.size() != static_cast<Eigen::Index>(width) * height * kClassCount)
    throw DimensionMismatch("encoded raster length");
  RasterDesign raster = makeRaster(width, height);
  for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(raster.pixelCount()); ++p) {
    Eigen::Index best = 0;
    encoded.segment(p * 3, 3).maxCoeff(&best);
    raster.classes[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(best);
  }
  return raster;
}

std::array<std::uint8_t, 3> classColor(PixelClass c) {
  switch (c) {
    case PixelClass::Solid: return {255, 0, 0};
    case PixelClass::Fluid: return {0, 255, 0};
    case PixelClass::Boundary: return {0, 0, 255};
  }
  return {0, 0, 0};
}

void writeRasterSet(std::ostream& out, const std::vector<RasterDesign>& rasters) {
  const int w = rasters.empty() ? 0 : rasters.front().width;
  const int h = rasters.empty() ? 0 : rasters.front().height;
  if (w > 0xffff || h > 0xffff) throw DomainError("raster too large for LFRD");
  out.write("LFRD", 4);
  putU16(out, static_cast<std::uint16_t>(w));
  putU16(out, static_cast<std::uint16_t>(h));
  putU32(out, static_cast<std::uint32_t>(rasters.size()));
  for (const auto& r : rasters) {
    if (r.width != w || r.height != h) throw DimensionMismatch("raster set must share one size");
    out.write(reinterpret_cast<const char*>(r.classes.data()), static_cast<std::streamsize>(r.classes.size()));
  }
  if (!out) throw IoError("failed writing raster set");
}

std::vector<RasterDesign> readRasterSet(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "LFRD") throw FormatError("missing LFRD magic");
  const int w = static_cast<int>(getUnsigned(in, 2));
  const int h = static_cast<int>(getUnsigned(in, 2));
  const std::uint32_t count = getUnsigned(in, 4);
  std::vector<RasterDesign> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    RasterDesign r = makeRaster(w, h);
    if (!in.read(reinterpret_cast<char*>(r.classes.data()), static_cast<std::streamsize>(r.classes.size())))
      throw FormatError("truncated raster payload");
    for (auto v : r.classes)
      if (v > 2) throw FormatError("class code out of range");
    out.push_back(std::move(r));
  }
  return out;
}

void writeRasterSet(const std::filesystem::path& path, const std::vector<RasterDesign>& rasters) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  writeRasterSet(out, rasters);
}

std::vector<RasterDesign> readRasterSet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return readRasterSet(in);
}

void writeRasterSheetPng(const std::filesystem::path& path, const std::vector<RasterDesign>& rasters, int columns,
                         int scale, const std::string& comment) {
  if (rasters.empty()) throw DomainError("no rasters to draw");
  columns = std::max(1, std::min<int>(columns, static_cast<int>(rasters.size())));
  const int rows = (static_cast<int>(rasters.size()) + columns - 1) / columns;
  const int cw = rasters.front().width * scale;
  const int ch = rasters.front().height * scale;
  const int width = columns * (cw + 1) + 1;
  const int height = rows * (ch + 1) + 1;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 128);
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    const int ox = 1 + static_cast<int>(i % columns) * (cw + 1);
    const int oy = 1 + static_cast<int>(i / columns) * (ch + 1);
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) {
        const auto color = classColor(rasters[i].at(y / scale, x / scale));
        const std::size_t off = (static_cast<std::size_t>(oy + y) * width + ox + x) * 3;
        std::copy(color.begin(), color.end(), rgb.begin() + static_cast<std::ptrdiff_t>(off));
      }
  }
  writePngRgb(path, width, height, rgb, comment);
}

}  // namespace latentflow
