#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "latentflow/raster.hpp"

namespace latentflow {

/// Steady Darcy flow through the conducting pixels of a raster at unit pressure drop.
struct FlowField {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd pressure;        ///< H x W; NaN where no pressure is defined
  Eigen::MatrixXd horizontalFlux;  ///< H x (W-1); flux from column c to c+1
  Eigen::MatrixXd verticalFlux;    ///< (H-1) x W; flux from row r to r+1
  double throughput = 0.0;         ///< flux leaving the inlet column
  double outletFlux = 0.0;         ///< flux entering the outlet column
  int iterations = 0;
  double residual = 0.0;  ///< relative residual of the linear solve
};

/// Permeability of a pixel class: FLUID 1, BOUNDARY 0.5, SOLID 0.
double permeability(PixelClass c);

/// Solves div(k grad p) = 0 with p = 1 on the conducting pixels of the first column,
/// p = 0 on those of the last column and no flux through solid walls. Face
/// transmissibility is the harmonic mean of the two cell permeabilities.
FlowField solveFlow(const RasterDesign& raster);

struct FlowObjectives {
  double nonUniformity = 0.0;  ///< coefficient of variation of FLUID cell speed in the central band
  double resistance = 0.0;     ///< 1 / throughput
};

/// Central band = the middle 50% of columns.
FlowObjectives flowObjectives(const FlowField& field, const RasterDesign& raster);

/// Cleans a generated raster (spanning fluid component only), solves, and scores it.
FlowObjectives evaluateDesign(const RasterDesign& raster);

/// Cell-center speed magnitudes (H x W, zero where no flow is defined).
Eigen::MatrixXd cellSpeed(const FlowField& field);

/// Debug dump: row, col, class, pressure, speed.
void writeFieldCsv(std::ostream& out, const FlowField& field, const RasterDesign& raster);

}  // namespace latentflow
