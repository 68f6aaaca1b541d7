#pragma once

#include "flsim/client.hpp"
#include "flsim/sampling.hpp"
#include "flsim/types.hpp"

#include <vector>

namespace flsim::fedlesscan {

struct RoundNotMissed : Error {
    RoundNotMissed() : Error("round is not in the missed list") {}
};

struct Config {
    double ema_alpha = 0.5;   // EMA smoothing, (0, 1]
    int tau = 2;              // staleness cutoff for the damped aggregation
    double max_training_time = 300.0;  // seconds scale for the missed-round penalty
    std::vector<double> epsilon_grid;  // empty: derived from pairwise distances
    int min_pts = 2;
};

// Disjoint cover of the pool: rookies were never invoked, stragglers are
// serving a cooldown, participants are everyone else.
struct TierPartition {
    std::vector<ClientId> rookies;
    std::vector<ClientId> participants;
    std::vector<ClientId> stragglers;
};

// Cooldown bookkeeping after a round outcome. Completing in time clears the
// cooldown; a miss appends the round and starts the doubling chain (0 -> 1,
// then x2 per further miss).
void update_cooldown(ClientHistory& history, bool completed_in_time, int round);

TierPartition partition_tiers(const std::vector<ClientProfile>& pool,
                              const std::vector<ClientHistory>& histories);

// EMA over durations, most recent value weighted highest.
double training_ema(const std::vector<double>& durations, double alpha);

// EMA over missed-round ratios (round / current_round), most recent first;
// zero when nothing was missed. The penalty of a fixed miss decays as
// training progresses.
double missed_round_ema(const std::vector<int>& missed_rounds, int current_round,
                        double alpha);

double total_ema(double training, double missed, double max_training_time);

// Tiered selection: rookies first, then clustered participants starting from
// the cluster matching the training progress (wrapping through the clusters
// sorted by ascending mean total EMA, fewest invocations first within a
// cluster), and uniform-random stragglers only to fill a shortfall.
std::vector<ClientId> select_clients(const std::vector<ClientProfile>& pool,
                                     const std::vector<ClientHistory>& histories, int k,
                                     int round, int max_rounds, const Config& config,
                                     Rng& rng);

// A late arrival proves the client was slow rather than crashed: the round
// leaves the missed list and the cooldown chain is unwound one doubling step
// (to zero when no misses remain).
void clear_missed_on_late_arrival(ClientHistory& history, int round);

}  // namespace flsim::fedlesscan
