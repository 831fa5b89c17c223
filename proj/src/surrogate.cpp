#include "latentflow/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "latentflow/errors.hpp"

namespace latentflow {

namespace {

constexpr double kSolverTolerance = 1e-13;
constexpr double kRequiredResidual = 1e-10;

double transmissibility(double a, double b) { return a > 0.0 && b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

}  // namespace

double permeability(PixelClass c) {
  switch (c) {
    case PixelClass::Fluid: return 1.0;
    case PixelClass::Boundary: return 0.5;
    case PixelClass::Solid: return 0.0;
  }
  return 0.0;
}

FlowField solveFlow(const RasterDesign& raster) {
  const int H = raster.height;
  const int W = raster.width;
  if (W < 2 || H < 1) throw DomainError("raster too small for a flow solve");
  auto kappa = [&](int r, int c) { return permeability(raster.at(r, c)); };
  auto index = [W](int r, int c) { return r * W + c; };

  // Conducting cells reachable from a fixed-pressure edge cell; the rest carry no flow.
  std::vector<int> state(static_cast<std::size_t>(H * W), 0);  // 0 none, 1 reachable
  std::vector<int> stack;
  bool inlet = false, outlet = false;
  for (int r = 0; r < H; ++r) {
    for (int c : {0, W - 1}) {
      if (kappa(r, c) > 0.0 && !state[static_cast<std::size_t>(index(r, c))]) {
        state[static_cast<std::size_t>(index(r, c))] = 1;
        stack.push_back(index(r, c));
      }
    }
    inlet = inlet || kappa(r, 0) > 0.0;
    outlet = outlet || kappa(r, W - 1) > 0.0;
  }
  if (!inlet || !outlet) throw InfeasibleGeometry("no conducting cells on the inlet or outlet edge");
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  while (!stack.empty()) {
    const int p = stack.back();
    stack.pop_back();
    const int r = p / W, c = p % W;
    for (int k = 0; k < 4; ++k) {
      const int rr = r + dr[k], cc = c + dc[k];
      if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
      const int q = index(rr, cc);
      if (!state[static_cast<std::size_t>(q)] && kappa(rr, cc) > 0.0) {
        state[static_cast<std::size_t>(q)] = 1;
        stack.push_back(q);
      }
    }
  }

  FlowField f;
  f.width = W;
  f.height = H;
  f.pressure = Eigen::MatrixXd::Constant(H, W, std::numeric_limits<double>::quiet_NaN());
  std::vector<int> unknown(static_cast<std::size_t>(H * W), -1);
  int n = 0;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      if (!state[static_cast<std::size_t>(index(r, c))]) continue;
      if (c == 0) f.pressure(r, c) = 1.0;
      else if (c == W - 1) f.pressure(r, c) = 0.0;
      else unknown[static_cast<std::size_t>(index(r, c))] = n++;
    }

  if (n > 0) {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        const int i = unknown[static_cast<std::size_t>(index(r, c))];
        if (i < 0) continue;
        double diag = 0.0;
        for (int k = 0; k < 4; ++k) {
          const int rr = r + dr[k], cc = c + dc[k];
          if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
          const double t = transmissibility(kappa(r, c), kappa(rr, cc));
          if (t == 0.0) continue;
          diag += t;
          const int j = unknown[static_cast<std::size_t>(index(rr, cc))];
          if (j >= 0) triplets.emplace_back(i, j, -t);
          else rhs(i) += t * f.pressure(rr, cc);
        }
        triplets.emplace_back(i, i, diag);
      }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(kSolverTolerance);
    cg.setMaxIterations(10 * H * W);
    cg.compute(A);
    const Eigen::VectorXd p = cg.solve(rhs);
    f.iterations = static_cast<int>(cg.iterations());
    const double rhsNorm = rhs.norm();
    f.residual = rhsNorm > 0.0 ? (A * p - rhs).norm() / rhsNorm : 0.0;
    if (!p.allFinite() || f.residual > kRequiredResidual)
      throw NumericFailure("flow solve did not converge (relative residual " + std::to_string(f.residual) + ")");
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        const int i = unknown[static_cast<std::size_t>(index(r, c))];
        if (i >= 0) f.pressure(r, c) = p(i);
      }
  }

  f.horizontalFlux = Eigen::MatrixXd::Zero(H, W - 1);
  f.verticalFlux = Eigen::MatrixXd::Zero(std::max(H - 1, 0), W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c + 1 < W; ++c) {
      const double t = transmissibility(kappa(r, c), kappa(r, c + 1));
      if (t > 0.0 && state[static_cast<std::size_t>(index(r, c))])
        f.horizontalFlux(r, c) = t * (f.pressure(r, c) - f.pressure(r, c + 1));
    }
  for (int r = 0; r + 1 < H; ++r)
    for (int c = 0; c < W; ++c) {
      const double t = transmissibility(kappa(r, c), kappa(r + 1, c));
      if (t > 0.0 && state[static_cast<std::size_t>(index(r, c))])
        f.verticalFlux(r, c) = t * (f.pressure(r, c) - f.pressure(r + 1, c));
    }
  f.throughput = f.horizontalFlux.col(0).sum();
  f.outletFlux = f.horizontalFlux.col(W - 2).sum();
  return f;
}

Eigen::MatrixXd cellSpeed(const FlowField& f) {
  Eigen::MatrixXd speed = Eigen::MatrixXd::Zero(f.height, f.width);
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c) {
      const double left = c > 0 ? f.horizontalFlux(r, c - 1) : 0.0;
      const double right = c + 1 < f.width ? f.horizontalFlux(r, c) : 0.0;
      const double up = r > 0 ? f.verticalFlux(r - 1, c) : 0.0;
      const double down = r + 1 < f.height ? f.verticalFlux(r, c) : 0.0;
      const double ux = 0.5 * (left + right);
      const double uy = 0.5 * (up + down);
      speed(r, c) = std::sqrt(ux * ux + uy * uy);
    }
  return speed;
}

FlowObjectives flowObjectives(const FlowField& field, const RasterDesign& raster) {
  if (field.width != raster.width || field.height != raster.height) throw DimensionMismatch("field and raster differ");
  if (!(field.throughput > 0.0) || !std::isfinite(field.throughput)) throw InfeasibleGeometry("zero throughput");
  const Eigen::MatrixXd speed = cellSpeed(field);
  const int c0 = raster.width / 4;
  const int c1 = raster.width - raster.width / 4;
  double sum = 0.0;
  int count = 0;
  for (int r = 0; r < raster.height; ++r)
    for (int c = c0; c < c1; ++c) {
      if (raster.at(r, c) != PixelClass::Fluid || std::isnan(field.pressure(r, c))) continue;
      sum += speed(r, c);
      ++count;
    }
  if (count == 0) throw InfeasibleGeometry("no flowing fluid in the central band");
  const double mean = sum / count;
  if (!(mean > 0.0)) throw InfeasibleGeometry("zero flow in the central band");
  // Two-pass variance for accuracy.
  double var = 0.0;
  for (int r = 0; r < raster.height; ++r)
    for (int c = c0; c < c1; ++c) {
      if (raster.at(r, c) != PixelClass::Fluid || std::isnan(field.pressure(r, c))) continue;
      var += (speed(r, c) - mean) * (speed(r, c) - mean);
    }
  var /= count;
  return {std::sqrt(var) / mean, 1.0 / field.throughput};
}

FlowObjectives evaluateDesign(const RasterDesign& raster) {
  const RasterDesign clean = keepSpanningFluid(raster);
  return flowObjectives(solveFlow(clean), clean);
}

void writeFieldCsv(std::ostream& out, const FlowField& field, const RasterDesign& raster) {
  const Eigen::MatrixXd speed = cellSpeed(field);
  out << "row,col,class,pressure,speed\n";
  char buf[96];
  for (int r = 0; r < field.height; ++r)
    for (int c = 0; c < field.width; ++c) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%.12g,%.12g\n", r, c, static_cast<int>(raster.at(r, c)),
                    field.pressure(r, c), speed(r, c));
      out << buf;
    }
}

}  // namespace latentflow
