#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "latentflow/errors.hpp"

namespace latentflow {

/// True when a is no worse than b in every objective and strictly better in one
/// (minimization).
template <typename DerivedA, typename DerivedB>
bool dominates(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b) {
  bool strict = false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) > b(k)) return false;
    if (a(k) < b(k)) strict = true;
  }
  return strict;
}

/// True when y is strictly below r in every objective.
template <typename DerivedY, typename DerivedR>
bool strictlyInside(const Eigen::DenseBase<DerivedY>& y, const Eigen::DenseBase<DerivedR>& r) {
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (!(y(k) < r(k))) return false;
  return true;
}

/// Indices of the non-dominated rows of Y (one objective vector per row), ascending.
/// Identical rows do not dominate each other and are all kept.
template <typename Derived>
std::vector<Eigen::Index> paretoFilter(const Eigen::MatrixBase<Derived>& Y) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = Y.rows();
  const Eigen::Index q = Y.cols();
  if (!Y.allFinite()) throw DomainError("objective values must be finite");
  std::vector<Eigen::Index> kept;
  if (m == 0) return kept;
  if (q == 2) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (Y(a, 0) != Y(b, 0)) return Y(a, 0) < Y(b, 0);
      if (Y(a, 1) != Y(b, 1)) return Y(a, 1) < Y(b, 1);
      return a < b;
    });
    bool haveBest = false;
    Scalar best{};
    for (std::size_t g = 0; g < order.size();) {
      std::size_t end = g;
      while (end < order.size() && Y(order[end], 0) == Y(order[g], 0)) ++end;
      const Scalar groupMin = Y(order[g], 1);
      if (!haveBest || groupMin < best) {
        for (std::size_t i = g; i < end && Y(order[i], 1) == groupMin; ++i) kept.push_back(order[i]);
        best = groupMin;
        haveBest = true;
      }
      g = end;
    }
    std::sort(kept.begin(), kept.end());
    return kept;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    bool dominated = false;
    for (Eigen::Index j = 0; j < m && !dominated; ++j) dominated = j != i && dominates(Y.row(j), Y.row(i));
    if (!dominated) kept.push_back(i);
  }
  return kept;
}

namespace detail {

// Sweep over points already sorted by the first objective ascending.
template <typename Scalar>
Scalar sweep2(const std::vector<std::array<Scalar, 2>>& pts, Scalar r0, Scalar r1) {
  Scalar volume{0};
  Scalar floor = r1;
  for (const auto& p : pts) {
    if (p[1] < floor) {
      volume += (r0 - p[0]) * (floor - p[1]);
      floor = p[1];
    }
  }
  return volume;
}

template <typename Scalar>
Scalar hypervolumeRec(std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> pts,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) {
  const Eigen::Index q = r.size();
  if (pts.empty()) return Scalar{0};
  if (q == 1) {
    Scalar lo = pts.front()(0);
    for (const auto& p : pts) lo = std::min(lo, p(0));
    return r(0) - lo;
  }
  if (q == 2) {
    std::vector<std::array<Scalar, 2>> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) flat.push_back({p(0), p(1)});
    std::sort(flat.begin(), flat.end());
    return sweep2(flat, r(0), r(1));
  }
  // Slice along the last objective.
  std::sort(pts.begin(), pts.end(), [q](const auto& a, const auto& b) { return a(q - 1) < b(q - 1); });
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rLow = r.head(q - 1);
  Scalar volume{0};
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> active;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    active.push_back(pts[i].head(q - 1));
    const Scalar next = i + 1 < pts.size() ? pts[i + 1](q - 1) : r(q - 1);
    const Scalar depth = next - pts[i](q - 1);
    if (depth > Scalar{0}) volume += depth * hypervolumeRec<Scalar>(active, rLow);
  }
  return volume;
}

}  // namespace detail

/// Lebesgue measure of the union of boxes [y, r] over the rows y of P. Every row
/// must lie strictly below r; dominated rows are allowed and add nothing.
template <typename DerivedP, typename DerivedR>
typename DerivedP::Scalar hypervolume(const Eigen::MatrixBase<DerivedP>& P, const Eigen::MatrixBase<DerivedR>& r) {
  using Scalar = typename DerivedP::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (P.rows() == 0) return Scalar{0};
  if (P.cols() != r.size()) throw DimensionMismatch("objective count differs from reference point");
  if (r.size() < 1) throw DomainError("need at least one objective");
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(P.rows()));
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (!strictlyInside(P.row(i), r)) throw DomainError("archive point does not dominate the reference point");
    pts.push_back(P.row(i).transpose());
  }
  return detail::hypervolumeRec<Scalar>(std::move(pts), Vec(r));
}

/// Hypervolume improvement of adding y0 to P. A y0 that does not dominate r adds 0.
template <typename DerivedP, typename DerivedY, typename DerivedR>
typename DerivedP::Scalar hvi(const Eigen::MatrixBase<DerivedP>& P, const Eigen::MatrixBase<DerivedY>& y0,
                              const Eigen::MatrixBase<DerivedR>& r) {
  using Scalar = typename DerivedP::Scalar;
  if (!strictlyInside(y0, r)) return Scalar{0};
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> joined(P.rows() + 1, r.size());
  if (P.rows() > 0) joined.topRows(P.rows()) = P;
  joined.row(P.rows()) = y0.transpose().reshaped(1, r.size());
  return std::max(Scalar{0}, hypervolume(joined, r) - hypervolume(P, r));
}

/// Two-objective front prepared for repeated improvement queries: non-dominated
/// points sorted by the first objective, so each query is linear in the front size.
template <typename Scalar>
class SortedFront2 {
public:
  template <typename DerivedP, typename DerivedR>
  SortedFront2(const Eigen::MatrixBase<DerivedP>& P, const Eigen::MatrixBase<DerivedR>& r) : r0_(r(0)), r1_(r(1)) {
    if (P.cols() != 2 || r.size() != 2) throw DimensionMismatch("two-objective front expected");
    for (Eigen::Index i : paretoFilter(P)) {
      if (!strictlyInside(P.row(i), r)) throw DomainError("archive point does not dominate the reference point");
      pts_.push_back({P(i, 0), P(i, 1)});
    }
    std::sort(pts_.begin(), pts_.end());
  }

  Scalar improvement(Scalar y0, Scalar y1) const {
    if (!(y0 < r0_ && y1 < r1_)) return Scalar{0};
    // Volume of [y, r] minus the part already dominated by the front, clipped to that box.
    Scalar covered{0};
    Scalar floor = r1_;
    for (const auto& p : pts_) {
      const Scalar a = std::max(p[0], y0);
      const Scalar b = std::max(p[1], y1);
      if (b < floor) {
        covered += (r0_ - a) * (floor - b);
        floor = b;
      }
    }
    return std::max(Scalar{0}, (r0_ - y0) * (r1_ - y1) - covered);
  }

  std::size_t size() const { return pts_.size(); }

private:
  Scalar r0_, r1_;
  std::vector<std::array<Scalar, 2>> pts_;
};

}  // namespace latentflow
