#include "flsim/fedlesscan.hpp"

#include "flsim/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace flsim::fedlesscan {

void update_cooldown(ClientHistory& history, bool completed_in_time, int round) {
    if (completed_in_time) {
        history.cooldown = 0;
        return;
    }
    history.cooldown = history.cooldown == 0 ? 1 : history.cooldown * 2;
    history.missed_rounds.push_back(round);
}

TierPartition partition_tiers(const std::vector<ClientProfile>& pool,
                              const std::vector<ClientHistory>& histories) {
    TierPartition tiers;
    for (const auto& profile : pool) {
        const auto& h = histories[profile.id];
        if (!h.invoked())
            tiers.rookies.push_back(profile.id);
        else if (h.cooldown > 0)
            tiers.stragglers.push_back(profile.id);
        else
            tiers.participants.push_back(profile.id);
    }
    return tiers;
}

double training_ema(const std::vector<double>& durations, double alpha) {
    if (durations.empty()) throw NoHistory();
    double ema = durations.back();
    for (int i = static_cast<int>(durations.size()) - 2; i >= 0; --i)
        ema = alpha * durations[i] + (1.0 - alpha) * ema;
    return ema;
}

double missed_round_ema(const std::vector<int>& missed_rounds, int current_round,
                        double alpha) {
    if (missed_rounds.empty()) return 0.0;
    for (int r : missed_rounds)
        if (r < 1 || r > current_round)
            throw InvalidRound("missed rounds must lie in [1, current round]");

    // Stored oldest first; the EMA walks most recent first.
    double ema = static_cast<double>(missed_rounds.front()) / current_round;
    for (std::size_t i = 1; i < missed_rounds.size(); ++i)
        ema = alpha * (static_cast<double>(missed_rounds[i]) / current_round) +
              (1.0 - alpha) * ema;
    return ema;
}

double total_ema(double training, double missed, double max_training_time) {
    return training + missed * max_training_time;
}

std::vector<ClientId> select_clients(const std::vector<ClientProfile>& pool,
                                     const std::vector<ClientHistory>& histories, int k,
                                     int round, int max_rounds, const Config& config,
                                     Rng& rng) {
    if (k < 1) throw Error("clients per round must be >= 1");
    if (round < 1 || round > max_rounds)
        throw InvalidRound("round must lie in [1, max rounds]");
    if (pool.empty()) throw NoAvailableClients();

    TierPartition tiers = partition_tiers(pool, histories);
    if (static_cast<int>(tiers.rookies.size()) >= k)
        return sample_without_replacement(tiers.rookies, k, rng);

    std::vector<ClientId> selection = tiers.rookies;
    int need = k - static_cast<int>(selection.size());

    if (need > 0 && !tiers.participants.empty()) {
        // A participant whose every invocation ended in a miss has no
        // measured duration; it enters clustering with the pessimistic
        // placeholder time.
        std::vector<FeaturePoint> features;
        std::vector<double> totals;
        features.reserve(tiers.participants.size());
        for (ClientId id : tiers.participants) {
            const auto& h = histories[id];
            const double training = h.durations.empty()
                                        ? config.max_training_time
                                        : training_ema(h.durations, config.ema_alpha);
            const double missed =
                missed_round_ema(h.missed_rounds, round, config.ema_alpha);
            features.emplace_back(training, missed);
            totals.push_back(total_ema(training, missed, config.max_training_time));
        }

        const auto scaled = standardize(features);
        const auto grid = config.epsilon_grid.empty() ? default_epsilon_grid(scaled)
                                                      : config.epsilon_grid;
        const auto choice = select_epsilon(scaled, grid, config.min_pts);
        const auto labels = dbscan(scaled, choice.epsilon, config.min_pts);

        // Group by label, outliers forming one extra group; order groups by
        // the mean total EMA of their members, fastest first.
        std::map<int, std::vector<int>> groups;
        for (std::size_t i = 0; i < labels.size(); ++i)
            groups[labels[i]].push_back(static_cast<int>(i));

        struct Cluster {
            double mean_total;
            std::vector<int> members;  // indices into tiers.participants
        };
        std::vector<Cluster> clusters;
        for (auto& [label, members] : groups) {
            double sum = 0.0;
            for (int m : members) sum += totals[m];
            clusters.push_back({sum / members.size(), std::move(members)});
        }
        std::stable_sort(clusters.begin(), clusters.end(),
                         [](const Cluster& a, const Cluster& b) {
                             return a.mean_total < b.mean_total;
                         });

        const int cluster_count = static_cast<int>(clusters.size());
        int start = static_cast<int>(std::floor(static_cast<double>(round) / max_rounds *
                                                cluster_count));
        start = std::min(start, cluster_count - 1);

        for (int step = 0; step < cluster_count && need > 0; ++step) {
            auto& cluster = clusters[(start + step) % cluster_count];
            std::sort(cluster.members.begin(), cluster.members.end(),
                      [&](int a, int b) {
                          const ClientId ca = tiers.participants[a];
                          const ClientId cb = tiers.participants[b];
                          if (histories[ca].invocation_count != histories[cb].invocation_count)
                              return histories[ca].invocation_count <
                                     histories[cb].invocation_count;
                          return ca < cb;
                      });
            for (int m : cluster.members) {
                if (need == 0) break;
                selection.push_back(tiers.participants[m]);
                --need;
            }
        }
    }

    if (need > 0 && !tiers.stragglers.empty()) {
        const auto fill = sample_without_replacement(tiers.stragglers, need, rng);
        selection.insert(selection.end(), fill.begin(), fill.end());
    }
    return selection;
}

void clear_missed_on_late_arrival(ClientHistory& history, int round) {
    auto it = std::find(history.missed_rounds.begin(), history.missed_rounds.end(), round);
    if (it == history.missed_rounds.end()) throw RoundNotMissed();
    history.missed_rounds.erase(it);
    history.cooldown = history.missed_rounds.empty() ? 0 : history.cooldown / 2;
}

}  // namespace flsim::fedlesscan
