#include "terramap/elevmap/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "terramap/error.hpp"

namespace terramap::elevmap {

namespace {

// Per-scan counters pack hits in the high and misses in the low 16 bits.
// Rays are processed in batches small enough that neither half overflows;
// between batches the counts spill into wide per-touched-cell totals.
constexpr std::uint32_t kHitUnit = std::uint32_t{1} << 16;
constexpr std::size_t kRayBatch = 65535;

int floor_mod(int g, int n) {
  const int m = g % n;
  return m < 0 ? m + n : m;
}

Eigen::Vector3i anchor_of(const Vec3& p, double r, const Eigen::Vector3i& cells) {
  Eigen::Vector3i a;
  for (int i = 0; i < 3; ++i) a[i] = static_cast<int>(std::floor(p[i] / r)) - cells[i] / 2;
  return a;
}

}  // namespace

double OccupancyParams::l_hit() const { return std::log(p_hit / (1.0 - p_hit)); }
double OccupancyParams::l_miss() const { return std::log(p_miss / (1.0 - p_miss)); }

void OccupancyParams::validate() const {
  if (!(p_hit > 0.5 && p_hit < 1.0)) throw InvalidInput("occupancy: p_hit must lie in (0.5, 1)");
  if (!(p_miss > 0.0 && p_miss < 0.5)) throw InvalidInput("occupancy: p_miss must lie in (0, 0.5)");
  if (!(t_low < 0.0 && 0.0 < tau_occ && tau_occ <= t_high)) {
    throw InvalidInput("occupancy: bounds must satisfy t_low < 0 < tau_occ <= t_high");
  }
}

Eigen::Vector3i GridConfig::cells() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidInput("grid resolution must be positive");
  }
  Eigen::Vector3i n;
  for (int i = 0; i < 3; ++i) {
    const double c = size[i] / resolution;
    n[i] = static_cast<int>(std::lround(c));
    if (n[i] < 1 || std::abs(c - n[i]) > 1e-6) {
      throw InvalidInput("grid size must be a positive multiple of the resolution");
    }
  }
  return n;
}

Eigen::Vector3i normalize(const CellKey& g, const Eigen::Vector3i& cells) {
  return {floor_mod(g.x, cells.x()), floor_mod(g.y, cells.y()), floor_mod(g.z, cells.z())};
}

VoxelGrid::VoxelGrid(const GridConfig& config, const Rotation& body_rot, const Vec3& body_pos)
    : config_(config),
      cells_(config.cells()),
      body_rot_(body_rot),
      body_pos_(body_pos) {
  if (!body_pos.allFinite() || !is_rotation(body_rot, 1e-6)) {
    throw InvalidInput("voxel grid: invalid initial pose");
  }
  const std::size_t n = static_cast<std::size_t>(cells_.prod());
  slots_.resize(n);
  counts_.assign(n, 0);
  window_min_ = anchor_of(body_pos_, config_.resolution, cells_);
}

bool VoxelGrid::in_window(const CellKey& g) const {
  const int rx = g.x - window_min_.x();
  const int ry = g.y - window_min_.y();
  const int rz = g.z - window_min_.z();
  return rx >= 0 && ry >= 0 && rz >= 0 && rx < cells_.x() && ry < cells_.y() && rz < cells_.z();
}

std::size_t VoxelGrid::slot_of(const CellKey& g) const {
  const Eigen::Vector3i l = normalize(g, cells_);
  return (static_cast<std::size_t>(l.x()) * cells_.y() + l.y()) * cells_.z() + l.z();
}

void VoxelGrid::reset_axis_range(int axis, int from, int to) {
  const int nx = cells_.x(), ny = cells_.y(), nz = cells_.z();
  for (int g = from; g < to; ++g) {
    const int l = floor_mod(g, cells_[axis]);
    for (int a = 0; a < (axis == 0 ? 1 : nx); ++a) {
      for (int b = 0; b < (axis == 1 ? 1 : ny); ++b) {
        for (int c = 0; c < (axis == 2 ? 1 : nz); ++c) {
          const int lx = axis == 0 ? l : a;
          const int ly = axis == 1 ? l : b;
          const int lz = axis == 2 ? l : c;
          Slot& s = slots_[(static_cast<std::size_t>(lx) * ny + ly) * nz + lz];
          s.logodds = 0.0;
          s.stamp = 0;
        }
      }
    }
  }
}

void VoxelGrid::move_to(const Rotation& body_rot, const Vec3& body_pos) {
  if (!body_pos.allFinite() || !body_rot.allFinite()) {
    throw InvalidInput("voxel grid: non-finite pose");
  }
  body_rot_ = body_rot;
  body_pos_ = body_pos;
  const Eigen::Vector3i next = anchor_of(body_pos_, config_.resolution, cells_);
  const Eigen::Vector3i shift = next - window_min_;
  if (shift.isZero()) return;

  bool full_exit = false;
  for (int a = 0; a < 3; ++a) full_exit = full_exit || std::abs(shift[a]) >= cells_[a];
  if (full_exit) {
    for (auto& s : slots_) {
      s.logodds = 0.0;
      s.stamp = 0;
    }
  } else {
    for (int a = 0; a < 3; ++a) {
      const int lo = window_min_[a];
      if (shift[a] > 0) reset_axis_range(a, lo, lo + shift[a]);
      if (shift[a] < 0) reset_axis_range(a, lo + cells_[a] + shift[a], lo + cells_[a]);
    }
  }
  window_min_ = next;
}

void VoxelGrid::slide(const Rotation& delta_rot, const Vec3& delta_trans) {
  if (!delta_rot.allFinite() || !delta_trans.allFinite()) {
    throw InvalidInput("voxel grid: non-finite increment");
  }
  const Vec3 pos = body_pos_ + body_rot_ * delta_trans;
  const Rotation rot = orthonormalize(body_rot_ * delta_rot);
  move_to(rot, pos);
}

void VoxelGrid::touch(std::size_t slot, const CellKey& g, bool hit) {
  std::uint32_t& n = counts_[slot];
  if (n == 0 && (spilled_.empty() || !spilled_.contains(static_cast<std::uint32_t>(slot)))) {
    touched_.push_back(static_cast<std::uint32_t>(slot));
    touched_keys_.push_back(g);
  }
  n += hit ? kHitUnit : 1;
}

void VoxelGrid::traverse(const Vec3& origin, const Vec3& end) {
  const double r = config_.resolution;
  const Vec3 o = origin / r;
  const Vec3 e = end / r;
  const Vec3 d = e - o;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Per axis: cells still to step, step direction, parametric distance to the
  // next boundary, room left before the window edge, slot stride and wrap.
  int c[3], steps[3], dir[3], room[3];
  double tmax[3], tdelta[3];
  std::ptrdiff_t stride[3], wrap[3], loc[3];
  const std::ptrdiff_t ny = cells_.y(), nz = cells_.z();
  const std::ptrdiff_t strides[3] = {ny * nz, nz, 1};
  int total = 0;
  bool inside = true;
  for (int a = 0; a < 3; ++a) {
    c[a] = static_cast<int>(std::floor(o[a]));
    const int ce = static_cast<int>(std::floor(e[a]));
    const int rel = c[a] - window_min_[a];
    inside = inside && rel >= 0 && rel < cells_[a];
    loc[a] = floor_mod(c[a], cells_[a]);
    if (ce > c[a]) {
      dir[a] = 1;
      steps[a] = ce - c[a];
      tdelta[a] = 1.0 / d[a];
      tmax[a] = (c[a] + 1.0 - o[a]) / d[a];
      room[a] = cells_[a] - 1 - rel;
    } else if (ce < c[a]) {
      dir[a] = -1;
      steps[a] = c[a] - ce;
      tdelta[a] = -1.0 / d[a];
      tmax[a] = (o[a] - c[a]) / -d[a];
      room[a] = rel;
    } else {
      dir[a] = 0;
      steps[a] = 0;
      tdelta[a] = 0.0;
      tmax[a] = kInf;
      room[a] = 0;
    }
    stride[a] = dir[a] * strides[a];
    // Slot offset applied when the local index wraps around the table edge.
    wrap[a] = -dir[a] * static_cast<std::ptrdiff_t>(cells_[a]) * strides[a];
    total += steps[a];
  }

  if (!inside) {
    traverse_from_outside(c, steps, dir, tmax, tdelta, total);
    return;
  }

  // Hot loop with every per-axis quantity in a named local so the compiler
  // keeps them in registers.
  std::ptrdiff_t slot = loc[0] * strides[0] + loc[1] * strides[1] + loc[2];
  double tx = tmax[0], ty = tmax[1], tz = tmax[2];
  int sx = steps[0], sy = steps[1], sz = steps[2];
  int rx = room[0], ry = room[1], rz = room[2];
  std::ptrdiff_t lx = loc[0], ly = loc[1], lz = loc[2];
  int cx = c[0], cy = c[1], cz = c[2];
  const std::ptrdiff_t nx = cells_.x();
  for (int k = 0; k < total; ++k) {
    touch(static_cast<std::size_t>(slot), CellKey{cx, cy, cz}, false);
    if (tx < ty && tx < tz) {
      if (--rx < 0) return;  // left the window; it is convex, so for good
      cx += dir[0];
      lx += dir[0];
      slot += stride[0];
      if (lx == nx || lx < 0) {
        lx -= dir[0] * nx;
        slot += wrap[0];
      }
      tx = --sx > 0 ? tx + tdelta[0] : kInf;
    } else if (ty < tz) {
      if (--ry < 0) return;
      cy += dir[1];
      ly += dir[1];
      slot += stride[1];
      if (ly == ny || ly < 0) {
        ly -= dir[1] * ny;
        slot += wrap[1];
      }
      ty = --sy > 0 ? ty + tdelta[1] : kInf;
    } else {
      if (--rz < 0) return;
      cz += dir[2];
      lz += dir[2];
      slot += stride[2];
      if (lz == nz || lz < 0) {
        lz -= dir[2] * nz;
        slot += wrap[2];
      }
      tz = --sz > 0 ? tz + tdelta[2] : kInf;
    }
  }
  touch(static_cast<std::size_t>(slot), CellKey{cx, cy, cz}, true);
}

void VoxelGrid::traverse_from_outside(int* c, int* steps, const int* dir, double* tmax,
                                      const double* tdelta, int total) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  bool entered = false;
  for (int k = 0;; ++k) {
    const CellKey g{c[0], c[1], c[2]};
    if (in_window(g)) {
      entered = true;
      touch(slot_of(g), g, k == total);
    } else if (entered) {
      return;
    }
    if (k == total) return;
    const int a = (tmax[0] < tmax[1] && tmax[0] < tmax[2]) ? 0 : (tmax[1] < tmax[2] ? 1 : 2);
    c[a] += dir[a];
    tmax[a] = --steps[a] > 0 ? tmax[a] + tdelta[a] : kInf;
  }
}

void VoxelGrid::integrate_scan(std::span<const Vec3> points, const Vec3& origin,
                               const OccupancyParams& op) {
  if (!origin.allFinite()) throw InvalidInput("integrate_scan: non-finite origin");
  if (points.empty()) return;
  ++frame_;
  touched_.clear();
  touched_keys_.clear();
  spilled_.clear();
  wide_hits_.clear();
  wide_misses_.clear();
  for (const auto& p : points) {
    if (!p.allFinite()) throw InvalidInput("integrate_scan: non-finite point");
  }

  // Rays are cast grouped by bearing so consecutive traversals share cells and
  // step patterns. Per-cell totals do not depend on the order.
  constexpr int kBins = 512;
  std::array<std::uint32_t, kBins + 1> start{};
  order_bins_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x() - origin.x();
    const double dy = points[i].y() - origin.y();
    const double l1 = std::abs(dx) + std::abs(dy);
    // Diamond angle in [0, 4): monotone in the true bearing and cheap.
    double a = 0.0;
    if (l1 > 0.0) {
      const double t = dy / l1;
      a = dx >= 0.0 ? (dy >= 0.0 ? t : 4.0 + t) : 2.0 - t;
    }
    const int bin = std::min(kBins - 1, static_cast<int>(a * (kBins / 4.0)));
    order_bins_[i] = static_cast<std::uint16_t>(bin);
    ++start[bin + 1];
  }
  for (int b = 0; b < kBins; ++b) start[b + 1] += start[b];
  order_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    order_[start[order_bins_[i]]++] = static_cast<std::uint32_t>(i);
  }

  for (std::size_t k = 0; k < order_.size(); ++k) {
    if (k > 0 && k % kRayBatch == 0) spill_counts(true);
    traverse(origin, points[order_[k]]);
  }
  spill_counts(false);

  const double lh = op.l_hit();
  const double lm = op.l_miss();
  for (std::size_t i = 0; i < touched_.size(); ++i) {
    Slot& slot = slots_[touched_[i]];
    if (slot.stamp == 0) {
      slot.logodds = 0.0;
      slot.key = touched_keys_[i];
    }
    const double hits = static_cast<double>(wide_hits_[i]);
    const double misses = static_cast<double>(wide_misses_[i]);
    slot.logodds = std::clamp(slot.logodds + hits * lh + misses * lm, op.t_low, op.t_high);
    slot.stamp = frame_;
  }
}

void VoxelGrid::spill_counts(bool more_to_come) {
  wide_hits_.resize(touched_.size(), 0);
  wide_misses_.resize(touched_.size(), 0);
  for (std::size_t i = 0; i < touched_.size(); ++i) {
    std::uint32_t& n = counts_[touched_[i]];
    wide_hits_[i] += n / kHitUnit;
    wide_misses_[i] += n % kHitUnit;
    n = 0;
    if (more_to_come) spilled_.insert(touched_[i]);
  }
}

std::optional<double> VoxelGrid::logodds(const CellKey& g) const {
  if (!in_window(g)) return std::nullopt;
  const Slot& s = slots_[slot_of(g)];
  if (s.stamp == 0) return std::nullopt;
  return s.logodds;
}

std::size_t VoxelGrid::stored_cells() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.stamp != 0; }));
}

std::vector<VoxelGrid::Cell> VoxelGrid::stored() const {
  std::vector<Cell> out;
  for (const auto& s : slots_) {
    if (s.stamp != 0) out.push_back({s.key, s.logodds});
  }
  std::sort(out.begin(), out.end(), [](const Cell& a, const Cell& b) {
    if (a.key.x != b.key.x) return a.key.x < b.key.x;
    if (a.key.y != b.key.y) return a.key.y < b.key.y;
    return a.key.z < b.key.z;
  });
  return out;
}

}  // namespace terramap::elevmap
