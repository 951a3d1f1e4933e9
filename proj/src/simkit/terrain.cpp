#include "terramap/simkit/terrain.hpp"

#include <algorithm>
#include <cmath>

#include "terramap/error.hpp"

namespace terramap::simkit {

namespace {

bool overlay(PrimitiveKind k) {
  return k == PrimitiveKind::kBeam || k == PrimitiveKind::kStone || k == PrimitiveKind::kPlank;
}

bool overlaps(const Primitive& a, const Primitive& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

// Parameter interval in which the plan-view ray o + s d lies inside [lo, hi).
bool slab(double o, double d, double lo, double hi, double& s0, double& s1) {
  if (d == 0.0) return o >= lo && o < hi;
  double a = (lo - o) / d;
  double b = (hi - o) / d;
  if (a > b) std::swap(a, b);
  s0 = std::max(s0, a);
  s1 = std::min(s1, b);
  return s0 < s1;
}

}  // namespace

std::string kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kSlab: return "slab";
    case PrimitiveKind::kGap: return "gap";
    case PrimitiveKind::kBeam: return "beam";
    case PrimitiveKind::kStone: return "stone";
    case PrimitiveKind::kPlank: return "plank";
  }
  return "slab";
}

PrimitiveKind parse_kind(const std::string& name) {
  for (auto k : {PrimitiveKind::kSlab, PrimitiveKind::kGap, PrimitiveKind::kBeam,
                 PrimitiveKind::kStone, PrimitiveKind::kPlank}) {
    if (kind_name(k) == name) return k;
  }
  throw InvalidInput("unknown terrain primitive '" + name + "'");
}

void TerrainSpec::validate() const {
  if (!std::isfinite(ground) || !std::isfinite(gap_depth)) {
    throw InvalidInput("terrain heights must be finite");
  }
  if (!(x_min < x_max && y_min < y_max)) throw InvalidInput("terrain extent is empty");
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    const bool finite = std::isfinite(p.x_min) && std::isfinite(p.x_max) &&
                        std::isfinite(p.y_min) && std::isfinite(p.y_max) &&
                        std::isfinite(p.height) && std::isfinite(p.slope);
    if (!finite || !(p.x_min < p.x_max) || !(p.y_min < p.y_max)) {
      throw InvalidInput("terrain primitive " + std::to_string(i) + " is empty or not finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (overlay(p.kind) == overlay(primitives[j].kind) && overlaps(p, primitives[j])) {
        throw InvalidInput("terrain primitives " + std::to_string(j) + " and " +
                           std::to_string(i) + " overlap");
      }
    }
  }
}

Terrain::Terrain(TerrainSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  // Overlay primitives first so top_at can return the first match.
  std::stable_partition(spec_.primitives.begin(), spec_.primitives.end(),
                        [](const Primitive& p) { return overlay(p.kind); });
}

const Primitive* Terrain::top_at(double x, double y) const {
  for (const auto& p : spec_.primitives) {
    if (p.covers(x, y)) return &p;
  }
  return nullptr;
}

double Terrain::surface(const Primitive* p, double x) const {
  if (!p) return spec_.ground;
  if (p->kind == PrimitiveKind::kGap) return spec_.gap_depth;
  return p->height + p->slope * (x - p->x_min);
}

double Terrain::height(double x, double y) const { return surface(top_at(x, y), x); }

std::optional<double> Terrain::intersect(const Vec3& o, const Vec3& d, double max_range) const {
  thread_local std::vector<double> breaks;
  breaks.clear();
  breaks.push_back(0.0);
  breaks.push_back(max_range);
  for (const auto& p : spec_.primitives) {
    double s0 = 0.0, s1 = max_range;
    if (slab(o.x(), d.x(), p.x_min, p.x_max, s0, s1) &&
        slab(o.y(), d.y(), p.y_min, p.y_max, s0, s1)) {
      breaks.push_back(s0);
      breaks.push_back(s1);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double s0 = breaks[k];
    const double s1 = breaks[k + 1];
    if (!(s1 > s0)) continue;
    const double sm = 0.5 * (s0 + s1);
    const Primitive* top = top_at(o.x() + sm * d.x(), o.y() + sm * d.y());

    // Surface along the segment: a + b s.
    const double a = surface(top, o.x());
    const double b = (top && top->kind != PrimitiveKind::kGap) ? top->slope * d.x() : 0.0;
    const double gap0 = o.z() - a;  // ray height above the surface at s = 0
    const double rate = d.z() - b;
    if (gap0 + rate * s0 <= 0.0) {
      if (s0 > 0.0) return s0;  // vertical face
      return std::nullopt;      // origin under the surface
    }
    if (rate < 0.0) {
      const double s = -gap0 / rate;
      if (s <= s1) return s;
    }
  }
  return std::nullopt;
}

std::vector<HeightSample> sample_heightfield(const Terrain& terrain, double resolution) {
  if (!(resolution > 0.0)) throw InvalidInput("height-field resolution must be positive");
  const auto& s = terrain.spec();
  const int nx = static_cast<int>(std::floor((s.x_max - s.x_min) / resolution + 1e-9));
  const int ny = static_cast<int>(std::floor((s.y_max - s.y_min) / resolution + 1e-9));
  std::vector<HeightSample> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double x = s.x_min + (i + 0.5) * resolution;
      const double y = s.y_min + (j + 0.5) * resolution;
      out.push_back({x, y, terrain.height(x, y)});
    }
  }
  return out;
}

double gap_width_for_level(int level) {
  if (level < 1 || level > 8) throw InvalidInput("terrain level must be in 1..8");
  return 0.20 + (level - 1) * (0.45 / 7.0);
}

double beam_width_for_level(int level) {
  if (level < 1 || level > 8) throw InvalidInput("terrain level must be in 1..8");
  return 0.30 - (level - 1) * 0.03;
}

TerrainSpec gap_course(const GapCourseParams& params) {
  const double w = gap_width_for_level(params.level);
  const double b = beam_width_for_level(params.level);
  if (params.gaps < 1 || !(params.landing > 0.0) || !(params.width > 0.0)) {
    throw InvalidInput("gap course needs at least one gap, positive landing and width");
  }
  TerrainSpec spec;
  const double half = 0.5 * params.width;
  double x = params.start;
  for (int g = 0; g < params.gaps; ++g) {
    spec.primitives.push_back({PrimitiveKind::kGap, x, x + w, -half, half, 0.0, 0.0});
    if (params.beam) {
      spec.primitives.push_back(
          {PrimitiveKind::kBeam, x, x + w, -0.5 * b, 0.5 * b, spec.ground, 0.0});
    }
    x += w + params.landing;
  }
  spec.x_min = params.start - 3.0;
  spec.x_max = x + 2.0;
  spec.y_min = -half;
  spec.y_max = half;
  return spec;
}

TerrainSpec stepping_stones(int level, double start, double length) {
  if (level < 1 || level > 8) throw InvalidInput("terrain level must be in 1..8");
  if (!(length > 0.0)) throw InvalidInput("stepping-stone field length must be positive");
  const double size = 0.50 - (level - 1) * 0.04;
  const double spacing = 0.10 + (level - 1) * 0.03;
  TerrainSpec spec;
  spec.primitives.push_back({PrimitiveKind::kGap, start, start + length, -2.0, 2.0, 0.0, 0.0});
  for (double x = start; x + size <= start + length + 1e-9; x += size + spacing) {
    for (double yc : {-0.13, 0.13}) {
      spec.primitives.push_back({PrimitiveKind::kStone, x, x + size, yc - 0.5 * size,
                                 yc + 0.5 * size, spec.ground, 0.0});
    }
  }
  spec.x_min = start - 3.0;
  spec.x_max = start + length + 3.0;
  spec.y_min = -2.0;
  spec.y_max = 2.0;
  return spec;
}

TerrainSpec corridor(double length, double width, double wall_height) {
  if (!(length > 0.0 && width > 0.0 && wall_height > 0.0)) {
    throw InvalidInput("corridor dimensions must be positive");
  }
  TerrainSpec spec;
  const double half = 0.5 * width;
  const double x0 = -5.0;
  const double x1 = length;
  spec.primitives.push_back({PrimitiveKind::kSlab, x0, x1, half, half + 0.5, wall_height, 0.0});
  spec.primitives.push_back({PrimitiveKind::kSlab, x0, x1, -half - 0.5, -half, wall_height, 0.0});
  spec.x_min = x0;
  spec.x_max = x1;
  spec.y_min = -half - 0.5;
  spec.y_max = half + 0.5;
  return spec;
}

}  // namespace terramap::simkit
