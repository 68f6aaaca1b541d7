#include "flsim/aggregation.hpp"

#include <cmath>

namespace flsim {

ModelParams weighted_fedavg(std::span<const UpdateRecord> updates) {
    if (updates.empty()) throw EmptyUpdateSet();
    const auto dim = updates.front().params.size();
    double total = 0.0;
    for (const auto& u : updates) {
        if (u.params.size() != dim) throw DimensionMismatch();
        total += u.cardinality;
    }
    Vector result = Vector::Zero(dim);
    for (const auto& u : updates) result += (u.cardinality / total) * u.params;
    return result;
}

double staleness_weight_linear_ratio(int origin_round, int current_round) {
    if (origin_round < 1 || origin_round > current_round)
        throw InvalidRound("origin round must lie in [1, current round]");
    return static_cast<double>(origin_round) / static_cast<double>(current_round);
}

double staleness_weight_inverse_sqrt(int origin_round, int current_round) {
    if (origin_round > current_round)
        throw InvalidRound("origin round must not exceed current round");
    const double staleness = current_round - origin_round;
    return 1.0 / std::sqrt(staleness + 1.0);
}

bool within_staleness_horizon(int origin_round, int current_round,
                              const StalenessPolicy& policy) {
    const int age = current_round - origin_round;
    switch (policy.kind) {
        case StalenessPolicy::Kind::CurrentOnly:
            return age == 0;
        case StalenessPolicy::Kind::LinearRatio:
            return age < policy.max_age;
        case StalenessPolicy::Kind::InverseSqrt:
            return age <= policy.max_age;
    }
    return false;
}

ModelParams aggregate_stale(std::span<const UpdateRecord> updates, int current_round,
                            const StalenessPolicy& policy) {
    if (updates.empty()) throw EmptyUpdateSet();
    const auto dim = updates.front().params.size();

    double total = 0.0;
    for (const auto& u : updates) {
        if (u.params.size() != dim) throw DimensionMismatch();
        if (u.origin_round > current_round)
            throw InvalidRound("update originates from a future round");
        if (within_staleness_horizon(u.origin_round, current_round, policy))
            total += u.cardinality;
    }
    if (total <= 0.0) throw AllUpdatesStale();

    Vector result = Vector::Zero(dim);
    double coefficient_sum = 0.0;
    for (const auto& u : updates) {
        if (!within_staleness_horizon(u.origin_round, current_round, policy)) continue;
        double weight = 1.0;
        switch (policy.kind) {
            case StalenessPolicy::Kind::CurrentOnly:
                break;
            case StalenessPolicy::Kind::LinearRatio:
                weight = staleness_weight_linear_ratio(u.origin_round, current_round);
                break;
            case StalenessPolicy::Kind::InverseSqrt:
                weight = staleness_weight_inverse_sqrt(u.origin_round, current_round);
                break;
        }
        const double coefficient = weight * (u.cardinality / total);
        coefficient_sum += coefficient;
        result += coefficient * u.params;
    }
    if (policy.renormalize && coefficient_sum > 0.0) result /= coefficient_sum;
    return result;
}

}  // namespace flsim
