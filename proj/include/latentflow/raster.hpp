#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentflow/geometry.hpp"

namespace latentflow {

enum class PixelClass : std::uint8_t { Solid = 0, Fluid = 1, Boundary = 2 };

inline constexpr int kClassCount = 3;

struct RasterProvenance {
  HalfProvenance left{ArchetypeId::Prong2, -1};
  HalfProvenance right{ArchetypeId::Prong2, -1};
  friend bool operator==(const RasterProvenance&, const RasterProvenance&) = default;
};

/// Row-major class grid. Row 0 is the top edge (y = 1); column 0 is the inlet edge.
struct RasterDesign {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> classes;
  RasterProvenance provenance;

  PixelClass at(int row, int col) const {
    return static_cast<PixelClass>(classes[static_cast<std::size_t>(row) * width + col]);
  }
  void set(int row, int col, PixelClass c) {
    classes[static_cast<std::size_t>(row) * width + col] = static_cast<std::uint8_t>(c);
  }
  std::size_t pixelCount() const { return classes.size(); }
  std::size_t count(PixelClass c) const;

  friend bool operator==(const RasterDesign&, const RasterDesign&) = default;
};

RasterDesign makeRaster(int width, int height, PixelClass fill = PixelClass::Solid);

/// Rebuilds BOUNDARY as the non-fluid pixels 4-adjacent to a FLUID pixel.
void deriveBoundary(RasterDesign& raster);

/// True when FLUID forms one 4-connected component touching the first and last column.
bool fluidSpansInletToOutlet(const RasterDesign& raster);

/// Keeps the largest FLUID component touching both the first and last column, turns
/// every other pixel SOLID and re-derives BOUNDARY. Throws InfeasibleGeometry when no
/// component spans.
RasterDesign keepSpanningFluid(const RasterDesign& raster);

/// Returns a description of the first violated invariant, or nothing when the raster is valid.
std::optional<std::string> checkRaster(const RasterDesign& raster);

/// Pixel-center sampling into a resolution x resolution grid. Throws ResolutionTooCoarse
/// when the sampled fluid loses connectivity and InfeasibleGeometry when no fluid remains.
RasterDesign rasterize(const FullGeometry& geometry, int resolution);

/// Horizontal flip: swaps inlet and outlet sides.
RasterDesign flipHorizontal(const RasterDesign& raster);

/// One-hot encoding, pixel-major with channel order SOLID, FLUID, BOUNDARY.
Eigen::RowVectorXd oneHot(const RasterDesign& raster);

/// Stacks one-hot rows of a batch into a matrix (one raster per row).
Eigen::MatrixXd oneHotBatch(const std::vector<RasterDesign>& rasters);

/// Per-pixel argmax over the three channel values of an encoded row.
RasterDesign argmaxRaster(const Eigen::Ref<const Eigen::RowVectorXd>& encoded, int width, int height);

/// Display colors: SOLID red, FLUID green, BOUNDARY blue.
std::array<std::uint8_t, 3> classColor(PixelClass c);

// Raster set file: "LFRD", u16 width, u16 height, u32 count, then count*H*W class bytes.
// Integers are little-endian.
void writeRasterSet(std::ostream& out, const std::vector<RasterDesign>& rasters);
std::vector<RasterDesign> readRasterSet(std::istream& in);
void writeRasterSet(const std::filesystem::path& path, const std::vector<RasterDesign>& rasters);
std::vector<RasterDesign> readRasterSet(const std::filesystem::path& path);

/// Tiles rasters into a single RGB image, `columns` per row, with a one-pixel gray gutter.
void writeRasterSheetPng(const std::filesystem::path& path, const std::vector<RasterDesign>& rasters, int columns,
                         int scale = 1, const std::string& comment = {});

}  // namespace latentflow
