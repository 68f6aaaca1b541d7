#pragma once

#include "flsim/types.hpp"

#include <random>
#include <vector>

namespace flsim {

using Rng = std::mt19937_64;

// k distinct uniform picks via partial Fisher-Yates; k may exceed the pool,
// in which case every item is returned (shuffled).
std::vector<int> sample_without_replacement(std::vector<int> items, int k, Rng& rng);

// Weighted sampling without replacement: repeatedly draw one item with
// probability proportional to its weight, remove it, and renormalize.
// Guarantees distinct picks; weights must be positive.
std::vector<int> weighted_sample_without_replacement(std::vector<int> items,
                                                     std::vector<double> weights,
                                                     int k, Rng& rng);

}  // namespace flsim
