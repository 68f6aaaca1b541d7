#pragma once

#include "flsim/types.hpp"
#include "flsim/update.hpp"

#include <span>

namespace flsim {

struct EmptyUpdateSet : Error {
    EmptyUpdateSet() : Error("aggregation needs at least one update") {}
};

struct AllUpdatesStale : Error {
    AllUpdatesStale() : Error("every update is older than the staleness horizon") {}
};

// How stale updates are damped and when they are discarded.
//   CurrentOnly: only updates from the current round survive (weight 1).
//   LinearRatio: weight t_i / T, discard when T - t_i >= max_age.
//   InverseSqrt: weight (T - t_i + 1)^(-1/2), discard when T - t_i > max_age.
struct StalenessPolicy {
    enum class Kind { CurrentOnly, LinearRatio, InverseSqrt };

    Kind kind = Kind::InverseSqrt;
    int max_age = 5;
    // When set, damped coefficients are rescaled to sum to one. Off by
    // default: the damped sum is used literally.
    bool renormalize = false;

    static StalenessPolicy current_only() { return {Kind::CurrentOnly, 1, false}; }
    static StalenessPolicy linear_ratio(int max_age = 2) {
        return {Kind::LinearRatio, max_age, false};
    }
    static StalenessPolicy inverse_sqrt(int max_age = 5) {
        return {Kind::InverseSqrt, max_age, false};
    }
};

// Cardinality-weighted average: sum_i (n_i / n) w_i with n = sum_i n_i.
ModelParams weighted_fedavg(std::span<const UpdateRecord> updates);

// Linear-ratio staleness weight t_i / T. The weight of a fixed staleness
// drifts upward as T grows, which is the inconsistency the inverse-sqrt
// weight repairs.
double staleness_weight_linear_ratio(int origin_round, int current_round);

// Inverse-sqrt staleness weight (T - t_i + 1)^(-1/2); depends only on the
// staleness T - t_i, so equal staleness gets equal weight at any round.
double staleness_weight_inverse_sqrt(int origin_round, int current_round);

// Age-bounded damped aggregation: discards updates beyond the policy
// horizon, then forms sum_i s(t_i, T) (n_i / n) w_i over the survivors,
// where n sums surviving cardinalities.
ModelParams aggregate_stale(std::span<const UpdateRecord> updates, int current_round,
                            const StalenessPolicy& policy);

// True when the update survives the policy's age cutoff at round T.
bool within_staleness_horizon(int origin_round, int current_round,
                              const StalenessPolicy& policy);

}  // namespace flsim
