#pragma once

#include "flsim/aggregation.hpp"
#include "flsim/client.hpp"
#include "flsim/sampling.hpp"
#include "flsim/types.hpp"

#include <vector>

namespace flsim::apodotiko {

struct EmptyScores : Error {
    EmptyScores() : Error("score list is empty") {}
};

struct NonPositiveScore : Error {
    NonPositiveScore() : Error("scores must be positive") {}
};

// A single adjustment rate drives both knobs: scores of older rounds decay
// with rate 1 - rho, and the booster of a passed-over client grows by 1 + rho.
struct Config {
    double rho = 0.2;                  // adjustment rate, (0, 1]
    double concurrency_ratio = 0.3;    // fraction of a round's results to wait for, (0, 1]
    StalenessPolicy staleness = StalenessPolicy::inverse_sqrt(5);

    double decay() const { return 1.0 - rho; }
    double promotion() const { return 1.0 + rho; }
};

// Per-client selection weights derived from raw efficiency scores.
struct ScoreTable {
    std::vector<double> raw;
    std::vector<double> normalized;   // score / max(score), in (0, 1]
    std::vector<double> probability;  // normalized / sum(normalized), sums to 1
};

// Efficiency score of one client: booster times the decay-weighted average
// over recorded rounds of n_c * (updates per second), where the per-round
// update rate is work_units / duration. Most recent round carries the
// largest weight. Requires at least one recorded duration.
double calculate_score(const ClientHistory& history, const ClientProfile& profile,
                       const Config& config);

ScoreTable normalize_scores(const std::vector<double>& scores);

// Booster ledger: selected clients reset to one; clients that were available
// but passed over are promoted by 1 + rho; busy clients are untouched.
void update_boosters(std::vector<ClientHistory>& histories,
                     const std::vector<ClientId>& available,
                     const std::vector<ClientId>& selected, const Config& config);

// Selection for one round: clients without recorded durations are sampled
// uniformly first; any shortfall is filled by probability-weighted sampling
// without replacement over the scored (available, previously measured)
// clients. Busy clients are never selected. Updates the booster ledger.
std::vector<ClientId> select_clients(const std::vector<ClientProfile>& pool,
                                     std::vector<ClientHistory>& histories, int k,
                                     const Config& config, Rng& rng);

// True once at least ceil(k * concurrency_ratio) results are available.
bool should_aggregate(int results_available, int k, const Config& config);

}  // namespace flsim::apodotiko
