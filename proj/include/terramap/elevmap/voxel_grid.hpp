#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "terramap/manifold.hpp"
#include "terramap/spatial.hpp"

namespace terramap::elevmap {

struct OccupancyParams {
  double p_hit = 0.7;
  double p_miss = 0.4;
  double t_low = -2.0;
  double t_high = 3.5;
  double tau_occ = 0.85;

  double l_hit() const;
  double l_miss() const;
  /// Throws InvalidInput unless p_hit > 0.5 > p_miss and t_low < 0 < tau_occ <= t_high.
  void validate() const;
};

struct HeightGrid;

struct GridConfig {
  Vec3 size{3.0, 3.0, 2.0};  ///< window extent L [m]
  double resolution = 0.05;  ///< cell edge r [m]

  /// Cells per axis; throws InvalidInput unless size is a positive multiple of
  /// the resolution.
  Eigen::Vector3i cells() const;
};

/// Ego-centric occupancy window over a fixed map frame.
///
/// Storage is a flat table with one slot per window cell. A cell with global
/// index g lives in slot normalize(g) (per-axis non-negative remainder by the
/// cell counts), so moving the window never moves cell contents: cells that
/// fall out of the window are reset and their slots are reused by the cells
/// entering on the opposite side.
///
/// The window is axis-aligned in the map frame and anchored on the body
/// position: it spans global indices [a - n/2, a - n/2 + n) per axis with
/// a = floor(p / r).
class VoxelGrid {
 public:
  explicit VoxelGrid(const GridConfig& config = {}, const Rotation& body_rot = Rotation::Identity(),
                     const Vec3& body_pos = Vec3::Zero());

  const GridConfig& config() const { return config_; }
  double resolution() const { return config_.resolution; }
  const Eigen::Vector3i& cells() const { return cells_; }
  std::size_t capacity() const { return slots_.size(); }

  /// Lowest global index of the window.
  const Eigen::Vector3i& window_min() const { return window_min_; }
  bool in_window(const CellKey& g) const;

  const Rotation& body_rot() const { return body_rot_; }
  const Vec3& body_pos() const { return body_pos_; }
  std::uint32_t frame() const { return frame_; }

  /// Applies an incremental body motion (expressed in the previous body frame)
  /// and moves the window with the body. Cells leaving the window are reset.
  void slide(const Rotation& delta_rot, const Vec3& delta_trans);

  /// Moves the window so it is anchored at the given body pose.
  void move_to(const Rotation& body_rot, const Vec3& body_pos);

  /// Ray-casts every point from origin and applies one clamped log-odds update
  /// per touched cell. Points and origin are in the map frame; cells outside
  /// the window are ignored.
  void integrate_scan(std::span<const Vec3> points, const Vec3& origin, const OccupancyParams& op);

  /// Log-odds of a stored cell, or nullopt when the cell was never updated or
  /// lies outside the window.
  std::optional<double> logodds(const CellKey& g) const;

  std::size_t stored_cells() const;

  struct Cell {
    CellKey key;
    double logodds;
  };
  /// Stored cells sorted by (x, y, z).
  std::vector<Cell> stored() const;

  /// Slot layout is column-major in z so a height scan walks contiguous memory.
  std::size_t slot_of(const CellKey& g) const;

 private:
  struct Slot {
    CellKey key;
    double logodds = 0.0;
    std::uint32_t stamp = 0;  ///< 0 marks an empty slot
  };

  friend HeightGrid extract_heights(const VoxelGrid& grid, const OccupancyParams& op);
  void reset_axis_range(int axis, int from, int to);
  void traverse(const Vec3& origin, const Vec3& end);
  void traverse_from_outside(int* c, int* steps, const int* dir, double* tmax,
                             const double* tdelta, int total);
  void touch(std::size_t slot, const CellKey& g, bool hit);

  GridConfig config_;
  Eigen::Vector3i cells_;
  Eigen::Vector3i window_min_;
  Rotation body_rot_;
  Vec3 body_pos_;
  std::uint32_t frame_ = 0;
  std::vector<Slot> slots_;

  void spill_counts(bool more_to_come);

  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint16_t> order_bins_;
  std::unordered_set<std::uint32_t> spilled_;
  std::vector<std::uint64_t> wide_hits_;
  std::vector<std::uint64_t> wide_misses_;
  std::vector<std::uint32_t> touched_;
  std::vector<CellKey> touched_keys_;
};

/// Per-axis non-negative remainder of a global index by the cell counts.
Eigen::Vector3i normalize(const CellKey& g, const Eigen::Vector3i& cells);

/// 2.5D raster over the window footprint. Column (ix, iy) covers global x/y
/// index window_min + (ix, iy); heights are map-frame z of the column top.
struct HeightGrid {
  int nx = 0;
  int ny = 0;
  double resolution = 0.05;
  int min_gx = 0;
  int min_gy = 0;
  double base_z = 0.0;  ///< map-frame z of the window floor
  std::vector<double> height;
  std::vector<std::uint8_t> known;

  HeightGrid() = default;
  HeightGrid(int nx, int ny, double resolution, int min_gx, int min_gy, double base_z);

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(ix) * ny + iy; }
  bool inside(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < nx && iy < ny; }
  double x_of(int ix) const { return (min_gx + ix + 0.5) * resolution; }
  double y_of(int iy) const { return (min_gy + iy + 0.5) * resolution; }
  /// Raster column containing a map-frame (x, y), possibly outside the raster.
  std::pair<int, int> column_of(double x, double y) const;
  std::size_t known_count() const;
};

/// Highest cell with log-odds >= tau_occ per column; its top face is the
/// column height.
HeightGrid extract_heights(const VoxelGrid& grid, const OccupancyParams& op);

/// Fills unknown entries of one ray, ordered from the origin outwards.
/// `dist` holds each entry's distance from the origin. Each unknown entry
/// takes the nearer of the last known entry before it and the first known
/// entry after it; equal distances resolve to the lower height.
void interpolate_ray(std::span<double> height, std::span<std::uint8_t> known,
                     std::span<const double> dist);

/// Bidirectional ray interpolation of unknown columns. Columns are grouped
/// into rays by bearing from the origin column (one ray per raster perimeter
/// cell); known columns are never modified and rays without known columns stay
/// unknown. An unknown origin column takes the lowest known 8-neighbour.
HeightGrid interpolate(const HeightGrid& hg, int origin_ix, int origin_iy);

inline constexpr int kPolicyRows = 17;
inline constexpr int kPolicyCols = 11;
inline constexpr int kPolicySize = kPolicyRows * kPolicyCols;
using PolicyHeightVector = std::array<double, kPolicySize>;

struct PolicyGridParams {
  double pitch = 0.1;
  /// Value reported for unknown samples (a deep gap below the base).
  double unknown_depth = 1.0;
};

/// Samples the 17 x 11 body-aligned lattice (x forward, row-major) around the
/// base and returns z_base - h per sample.
PolicyHeightVector policy_grid_sample(const HeightGrid& hg, double base_yaw, const Vec3& base_pos,
                                      const PolicyGridParams& params = {});

/// CSV writers; six fractional digits, unknown heights written as nan.
std::string height_grid_csv(const HeightGrid& hg);
std::string voxel_csv(const VoxelGrid& grid);

}  // namespace terramap::elevmap
