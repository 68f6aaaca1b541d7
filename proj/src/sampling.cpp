#include "flsim/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace flsim {

std::vector<int> sample_without_replacement(std::vector<int> items, int k, Rng& rng) {
    const int n = static_cast<int>(items.size());
    const int take = std::min(k, n);
    for (int i = 0; i < take; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(items[i], items[pick(rng)]);
    }
    items.resize(take);
    return items;
}

std::vector<int> weighted_sample_without_replacement(std::vector<int> items,
                                                     std::vector<double> weights,
                                                     int k, Rng& rng) {
    if (items.size() != weights.size())
        throw Error("weights must match items one to one");
    double total = 0.0;
    for (double w : weights) {
        if (w <= 0.0) throw Error("sampling weights must be positive");
        total += w;
    }

    std::vector<int> picks;
    const int take = std::min<int>(k, static_cast<int>(items.size()));
    picks.reserve(take);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int round = 0; round < take; ++round) {
        const double target = unit(rng) * total;
        double cumulative = 0.0;
        std::size_t chosen = items.size() - 1;
        for (std::size_t i = 0; i < items.size(); ++i) {
            cumulative += weights[i];
            if (target < cumulative) {
                chosen = i;
                break;
            }
        }
        picks.push_back(items[chosen]);
        total -= weights[chosen];
        items.erase(items.begin() + chosen);
        weights.erase(weights.begin() + chosen);
    }
    return picks;
}

}  // namespace flsim
