#pragma once

#include "flsim/apodotiko.hpp"
#include "flsim/baselines.hpp"
#include "flsim/client.hpp"
#include "flsim/fedlesscan.hpp"
#include "flsim/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flsim {

enum class StrategyKind { FedAvg, FedProx, FedLesScan, FedBuff, Apodotiko };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

// A block of identically configured clients; per-client cardinalities are
// drawn from the closed range when the pool is resolved.
struct ClientGroup {
    int count = 1;
    std::string hardware;
    int cardinality_lo = 1;
    int cardinality_hi = 1;
    int epochs = 1;
    int batch_size = 1;
    double dropout_prob = 0.0;
    double slow_factor = 0.0;
};

// One fully resolved experiment: the client pool, the synthetic objective,
// the strategy with its knobs, and the run controls. A scenario file fans
// out into one Scenario per listed seed.
struct Scenario {
    std::vector<HardwareClass> hardware;  // named classes referenced by groups
    std::vector<ClientGroup> groups;
    std::vector<ClientProfile> clients;  // resolved pool, indexed by client id

    int task_dim = 2;
    double task_spread = 1.0;
    std::uint64_t task_seed = 0;  // also derives the pool's cardinalities

    StrategyKind strategy = StrategyKind::FedAvg;
    apodotiko::Config apodotiko;
    fedlesscan::Config fedlesscan;
    baselines::FedBuffConfig fedbuff;
    // sync.round_timeout bounds every synchronous round and doubles as the
    // window after which an asynchronous strategy declares a crashed
    // invocation missed; sync.prox_mu only affects the proximal strategy.
    baselines::SyncConfig sync{300.0, 0.01};

    int clients_per_round = 1;
    int max_rounds = 1;
    std::optional<double> target_loss;
    double idle_threshold = 600.0;  // seconds before an idle instance scales down
    double learning_rate = 0.05;
    double cost_per_invocation = 4e-7;
    std::uint64_t seed = 0;
};

// Rebuilds `clients` from the groups and hardware classes. Cardinalities
// derive from the task seed, so every run seed shares the same pool.
void resolve_clients(Scenario& scenario);

}  // namespace flsim
