#pragma once

#include <optional>
#include <string>
#include <vector>

#include "terramap/manifold.hpp"

namespace terramap::simkit {

enum class PrimitiveKind { kSlab, kGap, kBeam, kStone, kPlank };

std::string kind_name(PrimitiveKind k);
PrimitiveKind parse_kind(const std::string& name);

/// Axis-aligned rectangle in plan view with a planar top
/// z = height + slope * (x - x_min). Gaps ignore height and use the terrain's
/// gap depth.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kSlab;
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double height = 0.0;
  double slope = 0.0;  ///< dz/dx, beams only

  bool covers(double x, double y) const {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
  }
};

struct TerrainSpec {
  double ground = 0.0;
  double gap_depth = -1.0;
  /// Slabs and gaps form the base layer; beams, stones and planks are laid
  /// over it and win where they overlap a gap.
  std::vector<Primitive> primitives;
  /// Plan-view extent used for height-field export.
  double x_min = -2.0;
  double x_max = 10.0;
  double y_min = -3.0;
  double y_max = 3.0;

  /// Throws InvalidInput on empty or non-finite rectangles, or when two
  /// primitives of the same layer overlap.
  void validate() const;
};

/// Analytic terrain. Height queries and ray intersections are exact for the
/// piecewise-planar surface.
class Terrain {
 public:
  explicit Terrain(TerrainSpec spec);

  const TerrainSpec& spec() const { return spec_; }
  double height(double x, double y) const;

  /// First intersection of origin + s * dir (unit dir) with the surface for
  /// s in (0, max_range], vertical faces included. Returns s.
  std::optional<double> intersect(const Vec3& origin, const Vec3& dir, double max_range) const;

 private:
  const Primitive* top_at(double x, double y) const;
  double surface(const Primitive* p, double x) const;

  TerrainSpec spec_;
};

struct HeightSample {
  double x;
  double y;
  double z;
};

/// Height field sampled at cell centres over the terrain extent.
std::vector<HeightSample> sample_heightfield(const Terrain& terrain, double resolution);

/// Gap course along +x: level 1..8 widens the gap and narrows the beam.
struct GapCourseParams {
  int level = 1;
  double start = 2.0;     ///< x of the first gap edge
  int gaps = 3;
  double landing = 1.5;   ///< solid ground between gaps
  double width = 6.0;     ///< course width in y
  bool beam = false;      ///< lay a beam along the course centre over each gap
};

double gap_width_for_level(int level);
double beam_width_for_level(int level);

TerrainSpec gap_course(const GapCourseParams& params);

/// Stepping stones across a single gap: size and spacing shrink and grow with
/// level.
TerrainSpec stepping_stones(int level, double start = 2.0, double length = 2.0);

/// Straight corridor along +x between two tall walls.
TerrainSpec corridor(double length, double width, double wall_height);

}  // namespace terramap::simkit
