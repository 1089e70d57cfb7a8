#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "raresage/knowledge/geometry.hpp"

namespace raresage::soz {

/// Activation unit: a 3x3-pixel cell. Voxel (vx, vy) covers pixels
/// [3vx, 3vx+2] x [3vy, 3vy+2].
struct Voxel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Voxel&, const Voxel&) = default;
  friend auto operator<=>(const Voxel&, const Voxel&) = default;
};

inline constexpr int kVoxelPixels = 3;

/// Centre of the voxel's central pixel, in pixel coordinates.
inline Point voxel_center(Voxel v) {
  return {kVoxelPixels * v.x + 1.5, kVoxelPixels * v.y + 1.5};
}

struct ClusterParams {
  /// Chebyshev radius in voxels (1 = 8-neighbourhood).
  int eps = 1;
  /// Core if the eps-neighbourhood, the point included, holds at least this many.
  std::size_t min_pts = 2;
  /// Clusters smaller than this are discarded as weak.
  std::size_t min_size = 135;
};

struct Cluster {
  /// Members in input order.
  std::vector<Voxel> voxels;
  /// Input indices of the members, ascending.
  std::vector<std::size_t> indices;
};

/// DBSCAN over voxel coordinates. Duplicate voxels are ignored after their
/// first occurrence. Points are visited in input order; a border point joins
/// the first cluster that reaches it. Surviving clusters are returned in order
/// of their smallest input index.
std::vector<Cluster> cluster_activation(std::span<const Voxel> voxels, const ClusterParams& params = {});

}  // namespace raresage::soz
