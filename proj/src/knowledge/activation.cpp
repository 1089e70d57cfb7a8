#include "raresage/knowledge/activation.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <unordered_map>

#include "raresage/error.hpp"

namespace raresage::soz {

namespace {

std::uint64_t key(int x, int y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
         static_cast<std::uint32_t>(y);
}

}  // namespace

std::vector<Cluster> cluster_activation(std::span<const Voxel> voxels, const ClusterParams& params) {
  if (params.eps < 0) throw ValidationError("cluster eps must be non-negative");

  // Unique voxels in first-occurrence order, with their original indices.
  std::unordered_map<std::uint64_t, std::size_t> where;
  std::vector<Voxel> pts;
  std::vector<std::size_t> origin;
  where.reserve(voxels.size() * 2);
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    if (where.emplace(key(voxels[i].x, voxels[i].y), pts.size()).second) {
      pts.push_back(voxels[i]);
      origin.push_back(i);
    }
  }

  const int eps = params.eps;
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (int dy = -eps; dy <= eps; ++dy) {
      for (int dx = -eps; dx <= eps; ++dx) {
        auto it = where.find(key(pts[i].x + dx, pts[i].y + dy));
        if (it != where.end()) out.push_back(it->second);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(pts.size(), kUnvisited);
  int next_cluster = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    auto nb = neighbours(i);
    if (nb.size() < params.min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int c = next_cluster++;
    label[i] = c;
    std::deque<std::size_t> seeds(nb.begin(), nb.end());
    while (!seeds.empty()) {
      const auto q = seeds.front();
      seeds.pop_front();
      if (label[q] == kNoise) label[q] = c;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = c;
      auto qn = neighbours(q);
      if (qn.size() >= params.min_pts) seeds.insert(seeds.end(), qn.begin(), qn.end());
    }
  }

  std::vector<Cluster> clusters(static_cast<std::size_t>(next_cluster));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (label[i] < 0) continue;
    auto& cl = clusters[static_cast<std::size_t>(label[i])];
    cl.voxels.push_back(pts[i]);
    cl.indices.push_back(origin[i]);
  }
  std::vector<Cluster> kept;
  for (auto& cl : clusters) {
    if (cl.voxels.size() >= params.min_size) kept.push_back(std::move(cl));
  }
  std::sort(kept.begin(), kept.end(),
            [](const Cluster& a, const Cluster& b) { return a.indices.front() < b.indices.front(); });
  return kept;
}

}  // namespace raresage::soz
