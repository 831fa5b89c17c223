#include "latentflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"

namespace latentflow {

namespace {

// Physical half-cavity layout. x runs 0..0.5 (normalized u = 2x), y runs 0..1.
constexpr double kCavityLeft = 0.25;
constexpr double kCavityBottom = 0.05;
constexpr double kCavityTop = 0.95;
constexpr double kProngOverlap = 0.02;  // prongs reach this far into the cavity
constexpr double kMinChannelGap = 0.03;
constexpr double kPortOvershoot = 0.05;  // trunks start outside the box and are clipped

double channelWidth(double normalized) { return 0.07 + 0.05 * normalized; }

double quantize(double v) { return std::round(v / kCoordinateQuantum) * kCoordinateQuantum; }

Point2 toNormalized(const Point2& physical) { return {quantize(2.0 * physical.x()), quantize(physical.y())}; }

Polygon physicalRect(double x0, double y0, double x1, double y1) {
  return {toNormalized({x0, y0}), toNormalized({x1, y0}), toNormalized({x1, y1}), toNormalized({x0, y1})};
}

Polygon regularPolygon(const Point2& center, double radius, int sides, double phase) {
  Polygon poly;
  for (int i = 0; i < sides; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / sides;
    poly.push_back(toNormalized(center + radius * Point2(std::cos(a), std::sin(a))));
  }
  return poly;
}

Polygon dropRepeats(Polygon poly) {
  Polygon out;
  for (const auto& p : poly)
    if (out.empty() || p != out.back()) out.push_back(p);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

// Sutherland-Hodgman against one half-plane: keep points with sign * (coord - bound) <= 0.
Polygon clipAxis(const Polygon& poly, int axis, double bound, double sign) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    const double da = sign * (a(axis) - bound);
    const double db = sign * (b(axis) - bound);
    if (da <= 0) out.push_back(a);
    if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
      const double t = da / (da - db);
      Point2 p = a + t * (b - a);
      p(axis) = bound;
      out.push_back(Point2(quantize(p.x()), quantize(p.y())));
    }
  }
  return out;
}

bool segmentsIntersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  auto onSegment = [](const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
           p.y() <= std::max(a.y(), b.y());
  };
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && onSegment(q1, q2, p1)) return true;
  if (d2 == 0 && onSegment(q1, q2, p2)) return true;
  if (d3 == 0 && onSegment(p1, p2, q1)) return true;
  if (d4 == 0 && onSegment(p1, p2, q2)) return true;
  return false;
}

Polygon canonical(const Polygon& poly) {
  if (poly.empty()) return poly;
  auto less = [](const Point2& a, const Point2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); };
  const auto start = std::min_element(poly.begin(), poly.end(), less) - poly.begin();
  Polygon out;
  for (std::size_t i = 0; i < poly.size(); ++i) out.push_back(poly[(start + i) % poly.size()]);
  return out;
}

std::vector<Polygon> canonicalSet(const std::vector<Polygon>& polys) {
  std::vector<Polygon> out;
  for (const auto& p : polys) out.push_back(canonical(p));
  std::sort(out.begin(), out.end(), [](const Polygon& a, const Polygon& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](const Point2& p, const Point2& q) {
      return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
  });
  return out;
}

void addClipped(std::vector<Polygon>& dest, const Polygon& poly) {
  Polygon clipped = clipToUnitBox(poly);
  if (clipped.size() >= 3) dest.push_back(std::move(clipped));
}

void requireSimple(const std::vector<Polygon>& polys) {
  for (const auto& p : polys)
    if (!isSimple(p)) throw InfeasibleGeometry("channel polygon self-intersects");
}

std::pair<double, double> portExtent(const std::vector<Polygon>& fluid) {
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& poly : fluid)
    for (const auto& p : poly)
      if (p.x() == 0.0) {
        lo = std::min(lo, p.y());
        hi = std::max(hi, p.y());
      }
  return {lo, hi};
}

HalfGeometry buildComb(const ArchetypeSpec& spec, const Eigen::VectorXd& params) {
  const int k = spec.prongCount();
  const double w = channelWidth(params(0));
  const double angle = (params(1) - 0.5) * std::numbers::pi / 5.0;
  const double spread = params(2);
  const double trunk = 0.06 + 0.08 * params(3);

  const Point2 dir(std::cos(angle), std::sin(angle));
  const Point2 hub = Point2(0.0, 0.5) + trunk * dir;
  const double pitch = 0.8 * spread / (k - 1);

  if (pitch - w < kMinChannelGap) throw InfeasibleGeometry("adjacent prongs overlap");
  if (0.4 * spread + 0.5 * w > 0.5 - kCavityBottom) throw InfeasibleGeometry("outer prong leaves the cavity");
  if (hub.x() + 0.5 * w > kCavityLeft - kMinChannelGap) throw InfeasibleGeometry("header collides with cavity");

  HalfGeometry half{spec.id, params, {}, {}, 0.0, 0.0, false};
  addClipped(half.fluid, thickSegment(hub - (trunk + kPortOvershoot) * dir, hub, w));

  std::vector<double> entries;
  for (int i = 0; i < k; ++i) entries.push_back(0.5 + 0.8 * spread * (static_cast<double>(i) / (k - 1) - 0.5));
  const double headerLo = std::min(entries.front(), hub.y());
  const double headerHi = std::max(entries.back(), hub.y());
  addClipped(half.fluid, thickSegment({hub.x(), headerLo}, {hub.x(), headerHi}, w));
  for (double y : entries) addClipped(half.fluid, thickSegment({hub.x(), y}, {kCavityLeft + kProngOverlap, y}, w));
  addClipped(half.fluid, physicalRect(kCavityLeft, kCavityBottom, 0.5, kCavityTop));

  requireSimple(half.fluid);
  std::tie(half.inletLow, half.inletHigh) = portExtent(half.fluid);
  if (half.inletHigh <= half.inletLow) throw InfeasibleGeometry("trunk does not reach the inlet edge");
  return half;
}

HalfGeometry buildDiffuser(const ArchetypeSpec& spec, const Eigen::VectorXd& params) {
  const double w = channelWidth(params(0));
  const double a = 0.02 + 0.03 * params(1);
  const int pattern = static_cast<int>(params(2));

  const double throatX = 0.07;
  const double mouthX = kCavityLeft + kProngOverlap;
  const Polygon diffuser = {toNormalized({throatX, 0.5 - 0.5 * w}), toNormalized({mouthX, 0.08}),
                            toNormalized({mouthX, 0.92}), toNormalized({throatX, 0.5 + 0.5 * w})};

  HalfGeometry half{spec.id, params, {}, {}, 0.0, 0.0, false};
  addClipped(half.fluid, thickSegment({-kPortOvershoot, 0.5}, {throatX + 0.01, 0.5}, w));
  addClipped(half.fluid, diffuser);
  addClipped(half.fluid, physicalRect(kCavityLeft, kCavityBottom, 0.5, kCavityTop));

  switch (pattern) {
    case 1:
      for (double y : {0.36, 0.5, 0.64}) half.obstacles.push_back(regularPolygon({0.19, y}, 0.9 * a, 4, 0.0));
      break;
    case 2:
      half.obstacles.push_back(regularPolygon({0.195, 0.5}, 1.1 * a, 8, std::numbers::pi / 8));
      break;
    case 3:
      for (double y : {0.4, 0.6})
        half.obstacles.push_back(physicalRect(0.19 - 0.5 * a, y - 1.2 * a, 0.19 + 0.5 * a, y + 1.2 * a));
      break;
    default:
      throw DomainError("obstacle_pattern must be 1, 2 or 3");
  }

  const double cavityU = 2.0 * kCavityLeft;
  for (const auto& obstacle : half.obstacles) {
    for (const auto& p : obstacle) {
      if (!pointInPolygon(diffuser, p) || p.x() >= cavityU)
        throw InfeasibleGeometry("obstacle extends beyond the diffuser");
    }
  }
  for (std::size_t i = 0; i < half.obstacles.size(); ++i)
    for (std::size_t j = i + 1; j < half.obstacles.size(); ++j)
      for (const auto& p : half.obstacles[i])
        if (pointInPolygon(half.obstacles[j], p)) throw InfeasibleGeometry("obstacles overlap");

  requireSimple(half.fluid);
  requireSimple(half.obstacles);
  std::tie(half.inletLow, half.inletHigh) = portExtent(half.fluid);
  return half;
}

}  // namespace

std::string_view archetypeName(ArchetypeId id) {
  switch (id) {
    case ArchetypeId::Prong2: return "PRONG2";
    case ArchetypeId::Prong3: return "PRONG3";
    case ArchetypeId::Prong4: return "PRONG4";
    case ArchetypeId::Prong5: return "PRONG5";
    case ArchetypeId::InnerGeom: return "INNER_GEOM";
  }
  return "UNKNOWN";
}

std::optional<ArchetypeId> parseArchetype(std::string_view name) {
  for (int i = 0; i < kArchetypeCount; ++i) {
    const auto id = static_cast<ArchetypeId>(i);
    if (archetypeName(id) == name) return id;
  }
  return std::nullopt;
}

int ArchetypeSpec::prongCount() const {
  return id == ArchetypeId::InnerGeom ? 0 : static_cast<int>(id) + 2;
}

Eigen::VectorXd ArchetypeSpec::midpoint() const {
  Eigen::VectorXd v(parameterCount());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const auto& p = params[static_cast<std::size_t>(j)];
    v(j) = p.discrete() ? std::round(0.5 * (p.lower + p.upper)) : 0.5 * (p.lower + p.upper);
  }
  return v;
}

bool ArchetypeSpec::contains(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  if (values.size() != parameterCount()) return false;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const auto& p = params[static_cast<std::size_t>(j)];
    const double v = values(j);
    if (!std::isfinite(v) || v < p.lower || v > p.upper) return false;
    if (p.discrete() && v != std::round(v)) return false;
  }
  return true;
}

std::vector<ArchetypeSpec> listArchetypes() {
  // Lower spread bounds keep adjacent prongs at least kMinChannelGap apart at the widest channel.
  const double spreadLower[] = {0.2, 0.4, 0.55, 0.75};
  std::vector<ArchetypeSpec> specs;
  for (int k = 2; k <= 5; ++k) {
    specs.push_back({static_cast<ArchetypeId>(k - 2),
                     {{"channel_width", 0.4, 0.9, 0},
                      {"inlet_angle", 0.1, 0.9, 0},
                      {"prong_spread", spreadLower[k - 2], 0.95, 0},
                      {"trunk_length", 0.2, 0.8, 0}},
                     std::to_string(k) + "-prong comb manifold: angled inlet trunk, header, parallel prongs"});
  }
  specs.push_back({ArchetypeId::InnerGeom,
                   {{"channel_width", 0.4, 0.9, 0}, {"obstacle_scale", 0.2, 0.9, 0}, {"obstacle_pattern", 1, 3, 3}},
                   "diffuser with three inner obstacle geometries"});
  return specs;
}

const ArchetypeSpec& archetypeSpec(ArchetypeId id) {
  static const std::vector<ArchetypeSpec> specs = listArchetypes();
  return specs.at(static_cast<std::size_t>(id));
}

std::string archetypeManifest(const std::vector<ArchetypeSpec>& specs) {
  std::ostringstream out;
  out << "# manifold archetypes (normalized half-cavity units)\n";
  for (const auto& spec : specs) {
    out << "\n[" << archetypeName(spec.id) << "]\n";
    out << "description = " << spec.description << "\n";
    out << "prongs = " << spec.prongCount() << "\n";
    for (const auto& p : spec.params) {
      out << p.name << " = ";
      if (p.discrete())
        out << "levels 1.." << p.levels << "\n";
      else
        out << "[" << p.lower << ", " << p.upper << "]\n";
    }
  }
  return out.str();
}

DesignTable sampleDesignTable(const ArchetypeSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("design table needs at least one row");
  const auto arch = static_cast<std::uint64_t>(spec.id);
  DesignTable table{spec.id, Eigen::MatrixXd(n, spec.parameterCount()), seed};
  for (Eigen::Index col = 0; col < spec.parameterCount(); ++col) {
    const auto& p = spec.params[static_cast<std::size_t>(col)];
    const auto c = static_cast<std::uint64_t>(col);
    if (p.discrete()) {
      for (int row = 0; row < n; ++row) {
        const double u = uniformFromKeys({seed, arch, static_cast<std::uint64_t>(row), c, 1});
        table.rows(row, col) = 1.0 + std::floor(u * p.levels);
      }
      continue;
    }
    std::vector<int> strata(static_cast<std::size_t>(n));
    std::iota(strata.begin(), strata.end(), 0);
    Rng shuffle({seed, arch, c, 0x1145ULL});
    for (std::size_t i = strata.size(); i > 1; --i) std::swap(strata[i - 1], strata[shuffle.below(i)]);
    for (int row = 0; row < n; ++row) {
      const double u = uniformFromKeys({seed, arch, static_cast<std::uint64_t>(row), c});
      const double t = (strata[static_cast<std::size_t>(row)] + u) / n;
      table.rows(row, col) = std::clamp(p.lower + (p.upper - p.lower) * t, p.lower, p.upper);
    }
  }
  return table;
}

void writeDesignTableCsv(std::ostream& out, const DesignTable& table, const ArchetypeSpec& spec) {
  out << "archetype,seed";
  for (const auto& p : spec.params) out << "," << p.name;
  out << "\n";
  out.precision(17);
  for (Eigen::Index r = 0; r < table.rows.rows(); ++r) {
    out << archetypeName(table.archetype) << "," << table.seed;
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c) out << "," << table.rows(r, c);
    out << "\n";
  }
}

double signedArea(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

bool pointInPolygon(const Polygon& poly, const Point2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xCross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < xCross) inside = !inside;
    }
  }
  return inside;
}

bool isSimple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segmentsIntersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return signedArea(poly) != 0.0;
}

Polygon clipToUnitBox(const Polygon& poly) {
  Polygon out = poly;
  out = clipAxis(out, 0, 0.0, -1.0);
  out = clipAxis(out, 0, 1.0, 1.0);
  out = clipAxis(out, 1, 0.0, -1.0);
  out = clipAxis(out, 1, 1.0, 1.0);
  return dropRepeats(std::move(out));
}

Polygon thickSegment(const Point2& a, const Point2& b, double width) {
  const Point2 along = (b - a).normalized();
  const Point2 across(-along.y(), along.x());
  const Point2 a0 = a - 0.5 * width * along;
  const Point2 b0 = b + 0.5 * width * along;
  const Point2 h = 0.5 * width * across;
  return {toNormalized(a0 - h), toNormalized(b0 - h), toNormalized(b0 + h), toNormalized(a0 + h)};
}

bool HalfGeometry::isFluid(const Point2& p) const {
  for (const auto& o : obstacles)
    if (pointInPolygon(o, p)) return false;
  for (const auto& f : fluid)
    if (pointInPolygon(f, p)) return true;
  return false;
}

HalfGeometry instantiate(const ArchetypeSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (!spec.contains(params)) throw DomainError("parameters outside archetype bounds");
  const Eigen::VectorXd values = params;
  return spec.id == ArchetypeId::InnerGeom ? buildDiffuser(spec, values) : buildComb(spec, values);
}

HalfGeometry mirror(const HalfGeometry& half) {
  auto reflect = [](const std::vector<Polygon>& polys) {
    std::vector<Polygon> out;
    for (const auto& poly : polys) {
      Polygon r;
      for (auto it = poly.rbegin(); it != poly.rend(); ++it) r.push_back(Point2(1.0 - it->x(), it->y()));
      out.push_back(std::move(r));
    }
    return out;
  };
  HalfGeometry m = half;
  m.fluid = reflect(half.fluid);
  m.obstacles = reflect(half.obstacles);
  m.mirrored = !half.mirrored;
  return m;
}

bool sameShape(const HalfGeometry& a, const HalfGeometry& b) {
  return canonicalSet(a.fluid) == canonicalSet(b.fluid) && canonicalSet(a.obstacles) == canonicalSet(b.obstacles);
}

bool FullGeometry::isFluid(const Point2& p) const {
  for (const auto& o : obstacles)
    if (pointInPolygon(o, p)) return false;
  for (const auto& f : fluid)
    if (pointInPolygon(f, p)) return true;
  return false;
}

FullGeometry mix(const HalfGeometry& left, const HalfGeometry& right) {
  if (left.mirrored) throw InfeasibleMix("left half must be unmirrored");
  if (!right.mirrored) throw InfeasibleMix("right half must be a mirrored copy");

  auto touches = [](const std::vector<Polygon>& polys, double u) {
    for (const auto& poly : polys)
      for (const auto& p : poly)
        if (p.x() == u) return true;
    return false;
  };
  if (!touches(left.fluid, 1.0) || !touches(right.fluid, 0.0))
    throw InfeasibleMix("halves do not share the electrode cavity");

  FullGeometry full{{}, {}, left.archetype, right.archetype};
  auto place = [](const std::vector<Polygon>& polys, double offset, std::vector<Polygon>& dest) {
    for (const auto& poly : polys) {
      Polygon p;
      for (const auto& v : poly) p.push_back(Point2(offset + 0.5 * v.x(), v.y()));
      dest.push_back(std::move(p));
    }
  };
  place(left.fluid, 0.0, full.fluid);
  place(left.obstacles, 0.0, full.obstacles);
  place(right.fluid, 0.5, full.fluid);
  place(right.obstacles, 0.5, full.obstacles);
  return full;
}

}  // namespace latentflow
