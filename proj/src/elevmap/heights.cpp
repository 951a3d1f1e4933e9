#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "terramap/elevmap/voxel_grid.hpp"
#include "terramap/error.hpp"

namespace terramap::elevmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RayPartition {
  int nx = -1, ny = -1, ox = -1, oy = -1;
  std::vector<std::vector<std::uint32_t>> rays;
  std::vector<std::vector<double>> dists;
};

const RayPartition& partition_for(int nx, int ny, int ox, int oy) {
  thread_local RayPartition cache;
  if (cache.nx == nx && cache.ny == ny && cache.ox == ox && cache.oy == oy) return cache;

  const int bins = std::max(1, 2 * (nx + ny) - 4);
  std::vector<std::vector<std::pair<double, std::uint32_t>>> members(bins);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      if (ix == ox && iy == oy) continue;
      const double dx = ix - ox;
      const double dy = iy - oy;
      const double angle = std::atan2(dy, dx) + std::numbers::pi;
      int bin = static_cast<int>(std::floor(angle / (2.0 * std::numbers::pi) * bins));
      if (bin >= bins) bin -= bins;
      members[bin].push_back(
          {std::hypot(dx, dy), static_cast<std::uint32_t>(ix) * static_cast<std::uint32_t>(ny) +
                                   static_cast<std::uint32_t>(iy)});
    }
  }

  cache = RayPartition{nx, ny, ox, oy, {}, {}};
  for (auto& m : members) {
    if (m.empty()) continue;
    std::sort(m.begin(), m.end());
    std::vector<std::uint32_t> ray;
    std::vector<double> dist;
    for (const auto& [d, idx] : m) {
      ray.push_back(idx);
      dist.push_back(d);
    }
    cache.rays.push_back(std::move(ray));
    cache.dists.push_back(std::move(dist));
  }
  return cache;
}

void append(std::string& out, const char* fmt, auto... args) {
  char buf[160];
  const int n = std::snprintf(buf, sizeof(buf), fmt, args...);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

HeightGrid::HeightGrid(int nx_, int ny_, double resolution_, int min_gx_, int min_gy_,
                       double base_z_)
    : nx(nx_),
      ny(ny_),
      resolution(resolution_),
      min_gx(min_gx_),
      min_gy(min_gy_),
      base_z(base_z_),
      height(static_cast<std::size_t>(nx_) * ny_, kNaN),
      known(static_cast<std::size_t>(nx_) * ny_, 0) {}

std::pair<int, int> HeightGrid::column_of(double x, double y) const {
  return {static_cast<int>(std::floor(x / resolution)) - min_gx,
          static_cast<int>(std::floor(y / resolution)) - min_gy};
}

std::size_t HeightGrid::known_count() const {
  return static_cast<std::size_t>(std::count(known.begin(), known.end(), 1));
}

HeightGrid extract_heights(const VoxelGrid& grid, const OccupancyParams& op) {
  const auto& n = grid.cells_;
  const auto& wmin = grid.window_min_;
  const double r = grid.resolution();
  HeightGrid hg(n.x(), n.y(), r, wmin.x(), wmin.y(), wmin.z() * r);

  std::vector<int> zloc(n.z());
  for (int k = 0; k < n.z(); ++k) zloc[k] = normalize({0, 0, wmin.z() + k}, n).z();

  for (int ix = 0; ix < n.x(); ++ix) {
    for (int iy = 0; iy < n.y(); ++iy) {
      const Eigen::Vector3i l = normalize({wmin.x() + ix, wmin.y() + iy, 0}, n);
      const std::size_t column = (static_cast<std::size_t>(l.x()) * n.y() + l.y()) * n.z();
      for (int k = n.z() - 1; k >= 0; --k) {
        const auto& s = grid.slots_[column + zloc[k]];
        if (s.stamp != 0 && s.logodds >= op.tau_occ) {
          const std::size_t i = hg.index(ix, iy);
          hg.height[i] = (wmin.z() + k + 1) * r;
          hg.known[i] = 1;
          break;
        }
      }
    }
  }
  return hg;
}

void interpolate_ray(std::span<double> height, std::span<std::uint8_t> known,
                     std::span<const double> dist) {
  const std::size_t n = height.size();
  if (known.size() != n || dist.size() != n) throw InvalidInput("interpolate_ray: size mismatch");
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Forward pass: most recent (farthest so far) known entry before each index.
  std::vector<std::size_t> before(n, kNone);
  for (std::size_t k = 0, last = kNone; k < n; ++k) {
    before[k] = last;
    if (known[k]) last = k;
  }
  // Reverse pass: nearest known entry after each index.
  std::vector<std::size_t> after(n, kNone);
  for (std::size_t k = n, next = kNone; k-- > 0;) {
    after[k] = next;
    if (known[k]) next = k;
  }

  std::vector<std::pair<std::size_t, double>> fills;
  for (std::size_t k = 0; k < n; ++k) {
    if (known[k]) continue;
    const std::size_t f = before[k];
    const std::size_t b = after[k];
    if (f == kNone && b == kNone) continue;
    double h;
    if (f == kNone) {
      h = height[b];
    } else if (b == kNone) {
      h = height[f];
    } else {
      const double df = dist[k] - dist[f];
      const double db = dist[b] - dist[k];
      if (df < db) {
        h = height[f];
      } else if (db < df) {
        h = height[b];
      } else {
        h = std::min(height[f], height[b]);
      }
    }
    fills.push_back({k, h});
  }
  for (const auto& [k, h] : fills) {
    height[k] = h;
    known[k] = 1;
  }
}

HeightGrid interpolate(const HeightGrid& hg, int origin_ix, int origin_iy) {
  if (!hg.inside(origin_ix, origin_iy)) throw InvalidInput("interpolate: origin outside raster");
  HeightGrid out = hg;
  const RayPartition& part = partition_for(hg.nx, hg.ny, origin_ix, origin_iy);

  std::vector<double> h;
  std::vector<std::uint8_t> k;
  for (std::size_t r = 0; r < part.rays.size(); ++r) {
    const auto& ray = part.rays[r];
    h.resize(ray.size());
    k.resize(ray.size());
    bool any_known = false;
    bool any_unknown = false;
    for (std::size_t i = 0; i < ray.size(); ++i) {
      h[i] = hg.height[ray[i]];
      k[i] = hg.known[ray[i]];
      any_known = any_known || k[i];
      any_unknown = any_unknown || !k[i];
    }
    if (!any_known || !any_unknown) continue;
    interpolate_ray(h, k, part.dists[r]);
    for (std::size_t i = 0; i < ray.size(); ++i) {
      out.height[ray[i]] = h[i];
      out.known[ray[i]] = k[i];
    }
  }

  const std::size_t o = out.index(origin_ix, origin_iy);
  if (!out.known[o]) {
    double lowest = std::numeric_limits<double>::infinity();
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if ((dx == 0 && dy == 0) || !out.inside(origin_ix + dx, origin_iy + dy)) continue;
        const std::size_t i = out.index(origin_ix + dx, origin_iy + dy);
        if (out.known[i]) lowest = std::min(lowest, out.height[i]);
      }
    }
    if (std::isfinite(lowest)) {
      out.height[o] = lowest;
      out.known[o] = 1;
    }
  }
  return out;
}

PolicyHeightVector policy_grid_sample(const HeightGrid& hg, double base_yaw, const Vec3& base_pos,
                                      const PolicyGridParams& params) {
  PolicyHeightVector out;
  const double c = std::cos(base_yaw);
  const double s = std::sin(base_yaw);
  for (int i = 0; i < kPolicyRows; ++i) {
    const double bx = (i - kPolicyRows / 2) * params.pitch;
    for (int j = 0; j < kPolicyCols; ++j) {
      const double by = (j - kPolicyCols / 2) * params.pitch;
      const double x = base_pos.x() + c * bx - s * by;
      const double y = base_pos.y() + s * bx + c * by;
      const auto [ix, iy] = hg.column_of(x, y);
      double value = params.unknown_depth;
      if (hg.inside(ix, iy) && hg.known[hg.index(ix, iy)]) {
        value = base_pos.z() - hg.height[hg.index(ix, iy)];
      }
      out[static_cast<std::size_t>(i * kPolicyCols + j)] = value;
    }
  }
  return out;
}

std::string height_grid_csv(const HeightGrid& hg) {
  std::string out = "x_index,y_index,x_m,y_m,height_m,known\n";
  for (int ix = 0; ix < hg.nx; ++ix) {
    for (int iy = 0; iy < hg.ny; ++iy) {
      const std::size_t i = hg.index(ix, iy);
      if (hg.known[i]) {
        append(out, "%d,%d,%.6f,%.6f,%.6f,1\n", ix, iy, hg.x_of(ix), hg.y_of(iy), hg.height[i]);
      } else {
        append(out, "%d,%d,%.6f,%.6f,nan,0\n", ix, iy, hg.x_of(ix), hg.y_of(iy));
      }
    }
  }
  return out;
}

std::string voxel_csv(const VoxelGrid& grid) {
  std::string out = "gx,gy,gz,logodds\n";
  for (const auto& c : grid.stored()) {
    append(out, "%d,%d,%d,%.6f\n", c.key.x, c.key.y, c.key.z, c.logodds);
  }
  return out;
}

}  // namespace terramap::elevmap
