#include "flsim/baselines.hpp"

namespace flsim::baselines {

std::vector<ClientId> select_random(const std::vector<ClientProfile>& pool,
                                    const std::vector<ClientHistory>& histories, int k,
                                    Rng& rng) {
    if (k < 1) throw Error("clients per round must be >= 1");
    std::vector<ClientId> available;
    for (const auto& profile : pool)
        if (!histories[profile.id].busy()) available.push_back(profile.id);
    if (available.empty()) throw NoAvailableClients();
    return sample_without_replacement(available, k, rng);
}

std::optional<ModelParams> fedbuff_step(std::vector<UpdateRecord>& buffer,
                                        UpdateRecord incoming,
                                        const FedBuffConfig& config,
                                        int current_round) {
    buffer.push_back(std::move(incoming));
    if (static_cast<int>(buffer.size()) < config.buffer_size) return std::nullopt;

    bool any_fresh = false;
    for (const auto& u : buffer)
        any_fresh = any_fresh ||
                    within_staleness_horizon(u.origin_round, current_round, config.staleness);
    if (!any_fresh) {
        buffer.clear();
        return std::nullopt;
    }
    ModelParams aggregate = aggregate_stale(buffer, current_round, config.staleness);
    buffer.clear();
    return aggregate;
}

}  // namespace flsim::baselines
