#pragma once

#include "flsim/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace flsim {

struct AlreadyBusy : Error {
    AlreadyBusy() : Error("client is already busy") {}
};

struct NotBusy : Error {
    NotBusy() : Error("client is not busy") {}
};

struct NonPositiveDuration : Error {
    NonPositiveDuration() : Error("training duration must be positive") {}
};

// A hardware resource class shared by a group of clients. Capacity is the
// number of model updates the class performs per second; it acts as the
// implicit hardware benchmark behind every simulated training duration.
struct HardwareClass {
    std::string name;
    double cef_capacity = 1.0;  // model updates per second, > 0
    double cold_penalty = 0.0;  // seconds added to a cold invocation, >= 0
    double cost_rate = 0.0;     // currency per second of execution, >= 0
};

// Static description of one client: its hardware class, local data size and
// training hyperparameters, plus the failure model used by the simulator.
struct ClientProfile {
    ClientId id = 0;
    HardwareClass hardware;
    int cardinality = 1;       // local sample count, >= batch_size
    int batch_size = 1;        // > 0
    int epochs = 1;            // > 0
    double dropout_prob = 0.0; // probability an invocation never completes
    double slow_factor = 0.0;  // sigma of the lognormal duration noise
};

enum class InvocationStatus { Available, Busy };

// Evolving behavioral record of a client. Durations are stored most recent
// first, so index 0 is always the latest round's training time. Missed round
// numbers are kept strictly increasing.
struct ClientHistory {
    std::vector<double> durations;
    std::vector<int> missed_rounds;
    int cooldown = 0;
    double booster = 1.0;
    int invocation_count = 0;
    std::optional<double> last_finish_time;
    InvocationStatus status = InvocationStatus::Available;

    bool busy() const { return status == InvocationStatus::Busy; }
    bool invoked() const { return invocation_count > 0; }

    // Dispatch transition: a busy client must never be dispatched again
    // until it is released.
    void mark_busy() {
        if (busy()) throw AlreadyBusy();
        status = InvocationStatus::Busy;
        ++invocation_count;
    }

    // Completion transition: prepends the measured duration and releases
    // the client.
    void record_completion(double duration, double finish_time) {
        if (!busy()) throw NotBusy();
        if (duration <= 0.0) throw NonPositiveDuration();
        durations.insert(durations.begin(), duration);
        status = InvocationStatus::Available;
        last_finish_time = finish_time;
    }
};

}  // namespace flsim
