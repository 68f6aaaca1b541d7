#pragma once

#include "flsim/aggregation.hpp"
#include "flsim/client.hpp"
#include "flsim/sampling.hpp"
#include "flsim/types.hpp"

#include <optional>
#include <vector>

namespace flsim::baselines {

struct FedBuffConfig {
    int buffer_size = 10;  // updates collected before an aggregation fires
    StalenessPolicy staleness = StalenessPolicy::inverse_sqrt(5);
};

struct SyncConfig {
    double round_timeout = 300.0;
    double prox_mu = 0.0;  // 0 recovers plain federated averaging
};

// Uniform selection without replacement over the non-busy pool.
std::vector<ClientId> select_random(const std::vector<ClientProfile>& pool,
                                    const std::vector<ClientHistory>& histories, int k,
                                    Rng& rng);

// Buffered aggregation step: append the incoming update; once buffer_size
// updates are collected, emit the damped aggregate and clear the buffer.
// When every buffered update has aged past the staleness horizon the buffer
// is dropped without an emission.
std::optional<ModelParams> fedbuff_step(std::vector<UpdateRecord>& buffer,
                                        UpdateRecord incoming,
                                        const FedBuffConfig& config,
                                        int current_round);

}  // namespace flsim::baselines
