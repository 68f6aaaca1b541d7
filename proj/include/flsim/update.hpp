#pragma once

#include "flsim/types.hpp"

namespace flsim {

// A client's model update as stored by the parameter store: tagged with the
// round it was trained against, the client's data cardinality, and the
// simulated time it arrived.
struct UpdateRecord {
    ClientId client = 0;
    int origin_round = 0;
    ModelParams params;
    int cardinality = 1;
    double arrival_time = 0.0;
};

}  // namespace flsim
