#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace latentflow {

enum class ArchetypeId : std::uint8_t { Prong2 = 0, Prong3 = 1, Prong4 = 2, Prong5 = 3, InnerGeom = 4 };

inline constexpr int kArchetypeCount = 5;

std::string_view archetypeName(ArchetypeId id);
std::optional<ArchetypeId> parseArchetype(std::string_view name);

struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  int levels = 0;  ///< 0 for continuous; otherwise integer levels 1..levels

  bool discrete() const { return levels > 0; }

  friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

struct ArchetypeSpec {
  ArchetypeId id;
  std::vector<ParameterSpec> params;
  std::string description;

  int prongCount() const;  ///< 0 for the diffuser archetype
  Eigen::Index parameterCount() const { return static_cast<Eigen::Index>(params.size()); }
  Eigen::VectorXd midpoint() const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& values) const;

  friend bool operator==(const ArchetypeSpec&, const ArchetypeSpec&) = default;
};

/// The five manifold families: comb manifolds with 2..5 prongs and a diffuser with obstacles.
std::vector<ArchetypeSpec> listArchetypes();
const ArchetypeSpec& archetypeSpec(ArchetypeId id);

/// Human-readable manifest of all archetypes and their parameter bounds.
std::string archetypeManifest(const std::vector<ArchetypeSpec>& specs);

struct DesignTable {
  ArchetypeId archetype;
  Eigen::MatrixXd rows;  ///< n x k, one design per row
  std::uint64_t seed = 0;
};

/// Latin-hypercube design table. Continuous columns place exactly one value in
/// each of n equal strata; discrete columns are uniform over their levels.
DesignTable sampleDesignTable(const ArchetypeSpec& spec, int n, std::uint64_t seed);

void writeDesignTableCsv(std::ostream& out, const DesignTable& table, const ArchetypeSpec& spec);

// ---------------------------------------------------------------------------
// Polygons

using Point2 = Eigen::Vector2d;
using Polygon = std::vector<Point2>;

/// Coordinates are snapped to this dyadic grid so reflections x -> 1 - x are exact.
inline constexpr double kCoordinateQuantum = 0x1.0p-24;

double signedArea(const Polygon& poly);
bool pointInPolygon(const Polygon& poly, const Point2& p);
bool isSimple(const Polygon& poly);
Polygon clipToUnitBox(const Polygon& poly);

/// Thick line segment from a to b in physical half-cavity units (x spans 0..0.5),
/// with square caps extending w/2 beyond both ends, returned in normalized coordinates.
Polygon thickSegment(const Point2& a, const Point2& b, double width);

/// One half of a manifold in normalized [0,1]^2 coordinates. Unmirrored halves have
/// their inlet port on x = 0 and meet the electrode cavity midline at x = 1.
struct HalfGeometry {
  ArchetypeId archetype;
  Eigen::VectorXd params;
  std::vector<Polygon> fluid;      ///< union of convex fluid regions
  std::vector<Polygon> obstacles;  ///< solid islands cut out of the fluid
  double inletLow = 0.0;           ///< port extent along the outer edge
  double inletHigh = 0.0;
  bool mirrored = false;

  bool isFluid(const Point2& p) const;
};

/// Builds the half manifold. Throws DomainError for out-of-bounds parameters and
/// InfeasibleGeometry when channels would merge or leave the cavity.
HalfGeometry instantiate(const ArchetypeSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& params);

/// Reflection about the vertical midline x = 0.5, with polygon orientation restored.
HalfGeometry mirror(const HalfGeometry& half);

/// Order-insensitive equality of the polygon sets (vertex cycles may start anywhere).
bool sameShape(const HalfGeometry& a, const HalfGeometry& b);

struct HalfProvenance {
  ArchetypeId archetype;
  int row = 0;
  friend bool operator==(const HalfProvenance&, const HalfProvenance&) = default;
};

/// Complete manifold on [0,1]^2: inlet on x = 0, outlet on x = 1.
struct FullGeometry {
  std::vector<Polygon> fluid;
  std::vector<Polygon> obstacles;
  ArchetypeId leftArchetype;
  ArchetypeId rightArchetype;

  bool isFluid(const Point2& p) const;
};

/// Left half onto [0,0.5] x [0,1], mirrored right half onto [0.5,1] x [0,1].
FullGeometry mix(const HalfGeometry& left, const HalfGeometry& right);

}  // namespace latentflow
