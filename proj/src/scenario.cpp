#include "flsim/scenario.hpp"

#include <random>

namespace flsim {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FedAvg: return "fedavg";
        case StrategyKind::FedProx: return "fedprox";
        case StrategyKind::FedLesScan: return "fedlesscan";
        case StrategyKind::FedBuff: return "fedbuff";
        case StrategyKind::Apodotiko: return "apodotiko";
    }
    return "unknown";
}

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "fedavg") return StrategyKind::FedAvg;
    if (name == "fedprox") return StrategyKind::FedProx;
    if (name == "fedlesscan") return StrategyKind::FedLesScan;
    if (name == "fedbuff") return StrategyKind::FedBuff;
    if (name == "apodotiko") return StrategyKind::Apodotiko;
    throw Error("unknown strategy: " + name);
}

void resolve_clients(Scenario& scenario) {
    // Splitmix step keeps the pool stream distinct from the task stream.
    std::mt19937_64 pool_rng(scenario.task_seed * 0x9E3779B97F4A7C15ULL + 1);
    scenario.clients.clear();

    const auto find_class = [&](const std::string& name) -> const HardwareClass& {
        for (const auto& hw : scenario.hardware)
            if (hw.name == name) return hw;
        throw Error("unknown hardware class: " + name);
    };

    ClientId next_id = 0;
    for (const auto& group : scenario.groups) {
        const HardwareClass& hw = find_class(group.hardware);
        std::uniform_int_distribution<int> card(group.cardinality_lo, group.cardinality_hi);
        for (int i = 0; i < group.count; ++i) {
            ClientProfile profile;
            profile.id = next_id++;
            profile.hardware = hw;
            profile.cardinality = card(pool_rng);
            profile.batch_size = group.batch_size;
            profile.epochs = group.epochs;
            profile.dropout_prob = group.dropout_prob;
            profile.slow_factor = group.slow_factor;
            scenario.clients.push_back(std::move(profile));
        }
    }
}

}  // namespace flsim
