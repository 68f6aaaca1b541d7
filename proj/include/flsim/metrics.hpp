#pragma once

#include "flsim/client.hpp"
#include "flsim/engine.hpp"
#include "flsim/types.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace flsim {

struct NoSelection : Error {
    NoSelection() : Error("round selected no clients") {}
};

struct EmptyPool : Error {
    EmptyPool() : Error("invocation counts are empty") {}
};

struct NoDispatches : Error {
    NoDispatches() : Error("event log contains no dispatches") {}
};

struct CostParams {
    double per_invocation = 4e-7;  // currency per function invocation
};

// Effective update ratio: successful clients over selected clients.
double eur(int selected, int successful);

// Spread between the most and least invoked client.
int selection_bias(const std::vector<int>& invocation_counts);

// Cold dispatches over total dispatches.
double cold_start_ratio(std::span<const LoggedEvent> events);

// Invocation cost plus per-second execution cost at each client's hardware
// rate. Completed invocations bill their measured duration; crashed ones
// bill until they were declared missed; invocations still in flight at the
// end bill up to the end of the log.
double estimate_cost(std::span<const LoggedEvent> events,
                     const std::vector<ClientProfile>& profiles,
                     const CostParams& params);

// First trace time at which the loss reaches the target; nullopt when the
// run never gets there.
std::optional<double> time_to_target(
    const std::vector<std::pair<double, double>>& loss_trace, double target_loss);

}  // namespace flsim
