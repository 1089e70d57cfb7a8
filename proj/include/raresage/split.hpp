#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "raresage/data_model.hpp"

namespace raresage {

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
};

/// Per class, floor(fraction * n) shuffled members go to the hold-out part.
/// Index lists come back sorted.
HoldoutSplit stratified_holdout(const Dataset& ds, double fraction, std::uint64_t seed);

/// Fold id per observation. Each class is shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes stay balanced.
std::vector<std::size_t> stratified_folds(const Dataset& ds, std::size_t folds, std::uint64_t seed);

}  // namespace raresage
