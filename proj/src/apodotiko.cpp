#include "flsim/apodotiko.hpp"

#include "flsim/task.hpp"

#include <algorithm>
#include <cmath>

namespace flsim::apodotiko {

double calculate_score(const ClientHistory& history, const ClientProfile& profile,
                       const Config& config) {
    if (history.durations.empty()) throw NoHistory();

    const double updates = static_cast<double>(
        work_units_for(profile.cardinality, profile.epochs, profile.batch_size));
    const double lambda = config.decay();

    double weighted_sum = 0.0;
    double weight_total = 0.0;
    double weight = 1.0;
    for (double duration : history.durations) {
        weighted_sum += weight * (profile.cardinality * (updates / duration));
        weight_total += weight;
        weight *= lambda;
    }
    return history.booster * (weighted_sum / weight_total);
}

ScoreTable normalize_scores(const std::vector<double>& scores) {
    if (scores.empty()) throw EmptyScores();
    for (double s : scores)
        if (s <= 0.0) throw NonPositiveScore();

    ScoreTable table;
    table.raw = scores;
    const double max_score = *std::max_element(scores.begin(), scores.end());
    table.normalized.reserve(scores.size());
    double normalized_sum = 0.0;
    for (double s : scores) {
        table.normalized.push_back(s / max_score);
        normalized_sum += table.normalized.back();
    }
    table.probability.reserve(scores.size());
    for (double n : table.normalized) table.probability.push_back(n / normalized_sum);
    return table;
}

void update_boosters(std::vector<ClientHistory>& histories,
                     const std::vector<ClientId>& available,
                     const std::vector<ClientId>& selected, const Config& config) {
    std::vector<bool> picked(histories.size(), false);
    for (ClientId id : selected) picked[id] = true;

    for (ClientId id : available)
        if (!picked[id]) histories[id].booster *= config.promotion();
    for (ClientId id : selected) histories[id].booster = 1.0;
}

std::vector<ClientId> select_clients(const std::vector<ClientProfile>& pool,
                                     std::vector<ClientHistory>& histories, int k,
                                     const Config& config, Rng& rng) {
    if (k < 1) throw Error("clients per round must be >= 1");

    // Clients with no recorded durations cannot be scored yet and go through
    // the uniform path; busy clients are excluded from both sides.
    std::vector<ClientId> fresh;
    std::vector<ClientId> scored;
    for (const auto& profile : pool) {
        const auto& h = histories[profile.id];
        if (h.busy()) continue;
        (h.durations.empty() ? fresh : scored).push_back(profile.id);
    }
    if (fresh.empty() && scored.empty()) throw NoAvailableClients();

    std::vector<ClientId> available = fresh;
    available.insert(available.end(), scored.begin(), scored.end());

    std::vector<ClientId> selection;
    if (static_cast<int>(fresh.size()) >= k) {
        selection = sample_without_replacement(fresh, k, rng);
    } else {
        selection = fresh;
        const int shortfall = k - static_cast<int>(fresh.size());
        if (shortfall > 0 && !scored.empty()) {
            std::vector<double> scores;
            scores.reserve(scored.size());
            for (ClientId id : scored)
                scores.push_back(calculate_score(histories[id], pool[id], config));
            const ScoreTable table = normalize_scores(scores);
            const auto picks =
                weighted_sample_without_replacement(scored, table.probability, shortfall, rng);
            selection.insert(selection.end(), picks.begin(), picks.end());
        }
    }

    update_boosters(histories, available, selection, config);
    return selection;
}

bool should_aggregate(int results_available, int k, const Config& config) {
    if (k < 1) throw Error("clients per round must be >= 1");
    const int needed =
        std::max(1, static_cast<int>(std::ceil(k * config.concurrency_ratio - 1e-9)));
    return results_available >= needed;
}

}  // namespace flsim::apodotiko
