#pragma once

#include "flsim/client.hpp"
#include "flsim/sampling.hpp"
#include "flsim/scenario.hpp"
#include "flsim/types.hpp"
#include "flsim/update.hpp"

#include <string>
#include <utility>
#include <vector>

namespace flsim {

struct ScenarioInvalid : Error {
    explicit ScenarioInvalid(const std::string& what) : Error(what) {}
};

struct StoppingRuleUnreachable : Error {
    explicit StoppingRuleUnreachable(const std::string& what) : Error(what) {}
};

enum class EventKind { Dispatch, Completion, Miss, AggregationCheck, RoundTimeout };

std::string to_string(EventKind kind);

// One line of the simulated trace. Round-level events carry client -1.
struct LoggedEvent {
    double time = 0.0;
    EventKind kind = EventKind::Dispatch;
    ClientId client = -1;
    int round = 0;
    bool cold = false;      // Dispatch
    double duration = 0.0;  // Completion
    int aggregated = 0;     // AggregationCheck: updates folded into the model
    int stale = 0;          // AggregationCheck: of those, updates from earlier rounds
};

struct RoundRecord {
    int round = 0;
    int selected = 0;
    int successful = 0;  // arrivals while the round was still current
    int cold = 0;
    int stale_included = 0;
    double eur = 0.0;
    double loss_after = 0.0;
    double end_time = 0.0;
};

struct RunResult {
    std::vector<std::pair<double, double>> loss_trace;  // (time, loss) per aggregation
    std::vector<RoundRecord> rounds;
    std::vector<LoggedEvent> events;
    std::vector<UpdateRecord> update_store;  // every arrival, timely or late
    std::vector<int> invocation_counts;      // per client, at end of run
    std::vector<ClientHistory> histories;    // per client, at end of run

    double end_time = 0.0;
    double final_loss = 0.0;
    int rounds_run = 0;
    bool reached_target = false;
    long dispatches = 0;
    long completions = 0;
    long misses = 0;
    long unresolved = 0;  // invocations still in flight when the run stopped
};

// Simulated duration of one invocation: work_units / capacity scaled by
// lognormal noise exp(slow_factor * z), plus the cold penalty when cold.
double duration_of(const ClientProfile& profile, long work_units, bool cold, Rng& rng);

// An invocation is cold when the client never finished before, or has been
// idle longer than the scale-down threshold.
bool is_cold(const std::optional<double>& last_finish_time, double now,
             double idle_threshold);

// Structural and range checks on a resolved scenario; throws ScenarioInvalid.
void validate_scenario(const Scenario& scenario);

// Runs the scenario to its stopping rule (target loss and/or max rounds).
// Deterministic: identical scenarios produce identical results.
RunResult simulate(const Scenario& scenario);

}  // namespace flsim
