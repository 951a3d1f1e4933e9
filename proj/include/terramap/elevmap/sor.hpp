#pragma once

#include <span>
#include <vector>

#include "terramap/manifold.hpp"

namespace terramap::elevmap {

/// Statistical outlier removal: drops points whose mean distance to their k
/// nearest neighbours exceeds mean + sigma_mult * stddev over the cloud.
/// Survivors keep their input order. Clouds with fewer than k + 1 points are
/// returned unchanged.
std::vector<Vec3> sor_filter(std::span<const Vec3> points, std::size_t k, double sigma_mult);

}  // namespace terramap::elevmap
