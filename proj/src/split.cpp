#include "raresage/split.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "raresage/error.hpp"
#include "raresage/rng.hpp"

namespace raresage {

HoldoutSplit stratified_holdout(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("hold-out fraction must be in [0, 1)");
  Rng rng(seed);
  HoldoutSplit out;
  for (const auto& c : ds.classes()) {
    auto idx = ds.indices_of(c);
    rng.shuffle(std::span<std::size_t>(idx));
    const auto h = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
    out.holdout.insert(out.holdout.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(h), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.holdout.begin(), out.holdout.end());
  return out;
}

std::vector<std::size_t> stratified_folds(const Dataset& ds, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least 2 folds, got " + std::to_string(folds));
  Rng rng(seed);
  std::vector<std::size_t> fold(ds.size(), 0);
  std::size_t deal = 0;
  for (const auto& c : ds.classes()) {
    auto idx = ds.indices_of(c);
    rng.shuffle(std::span<std::size_t>(idx));
    for (auto i : idx) fold[i] = deal++ % folds;
  }
  return fold;
}

}  // namespace raresage
