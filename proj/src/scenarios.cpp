#include "flsim/scenario_io.hpp"

namespace flsim {

namespace {

// 100 identical CPU clients with equal data. Selection pressure comes from
// duration noise only, so a fair strategy should spread invocations about
// as evenly as uniform random selection does.
constexpr const char* kHomogeneous = R"json({
  "hardware": [
    {"name": "cpu-small", "cef_capacity": 0.05, "cold_penalty": 4.0, "cost_rate": 3.0e-5}
  ],
  "clients": [
    {"count": 100, "hardware": "cpu-small", "cardinality": [200, 200],
     "epochs": 1, "batch_size": 50, "dropout_prob": 0.0, "slow_factor": 0.15}
  ],
  "task": {"dim": 8, "spread": 0.5, "seed": 90210},
  "strategy": {"name": "apodotiko", "rho": 0.2, "concurrency_ratio": 0.3, "staleness_max_age": 5},
  "run": {
    "clients_per_round": 50, "max_rounds": 30, "round_timeout": 150.0,
    "idle_threshold": 600.0, "learning_rate": 0.05,
    "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
  }
})json";

// The 130/50/20 hardware mix: one vCPU, two vCPU and GPU-backed clients with
// unbalanced per-client data. GPU clients train more than an order of
// magnitude faster, so waiting for the full cohort is dominated by the slow
// tier, and a synchronous round is long enough that sitting out a single
// round can cool a client's instance down.
constexpr const char* kHeterogeneous = R"json({
  "hardware": [
    {"name": "cpu-small",  "cef_capacity": 0.02, "cold_penalty": 4.0, "cost_rate": 3.0e-5},
    {"name": "cpu-medium", "cef_capacity": 0.04, "cold_penalty": 4.0, "cost_rate": 6.0e-5},
    {"name": "gpu",        "cef_capacity": 0.5,  "cold_penalty": 6.0, "cost_rate": 1.6e-4}
  ],
  "clients": [
    {"count": 130, "hardware": "cpu-small", "cardinality": [60, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 0.0, "slow_factor": 0.2},
    {"count": 50, "hardware": "cpu-medium", "cardinality": [60, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 0.0, "slow_factor": 0.2},
    {"count": 20, "hardware": "gpu", "cardinality": [60, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 0.0, "slow_factor": 0.2}
  ],
  "task": {"dim": 8, "spread": 0.5, "seed": 424242},
  "strategy": {"name": "apodotiko", "rho": 0.2, "concurrency_ratio": 0.3, "staleness_max_age": 5},
  "run": {
    "clients_per_round": 100, "max_rounds": 120,
    "round_timeout": 420.0, "idle_threshold": 600.0, "learning_rate": 0.05,
    "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
  }
})json";

// 30% of the pool crashes on every invocation; the rest is reliable and
// homogeneous. Rounds that pick crashers run to the timeout and waste their
// slots.
constexpr const char* kStraggler30 = R"json({
  "hardware": [
    {"name": "cpu-small", "cef_capacity": 0.05, "cold_penalty": 4.0, "cost_rate": 3.0e-5}
  ],
  "clients": [
    {"count": 70, "hardware": "cpu-small", "cardinality": [100, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 0.0, "slow_factor": 0.2},
    {"count": 30, "hardware": "cpu-small", "cardinality": [100, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 1.0, "slow_factor": 0.2}
  ],
  "task": {"dim": 8, "spread": 0.5, "seed": 31337},
  "strategy": {"name": "fedlesscan", "ema_alpha": 0.5, "tau": 2},
  "run": {
    "clients_per_round": 50, "max_rounds": 40, "round_timeout": 150.0,
    "idle_threshold": 600.0, "learning_rate": 0.05,
    "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
  }
})json";

// Same shape with the ratio flipped: 70% crashers. Every round must dip into
// the straggler tier to fill its quota.
constexpr const char* kStraggler70 = R"json({
  "hardware": [
    {"name": "cpu-small", "cef_capacity": 0.05, "cold_penalty": 4.0, "cost_rate": 3.0e-5}
  ],
  "clients": [
    {"count": 30, "hardware": "cpu-small", "cardinality": [100, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 0.0, "slow_factor": 0.2},
    {"count": 70, "hardware": "cpu-small", "cardinality": [100, 300],
     "epochs": 1, "batch_size": 50, "dropout_prob": 1.0, "slow_factor": 0.2}
  ],
  "task": {"dim": 8, "spread": 0.5, "seed": 31338},
  "strategy": {"name": "fedlesscan", "ema_alpha": 0.5, "tau": 2},
  "run": {
    "clients_per_round": 50, "max_rounds": 40, "round_timeout": 150.0,
    "idle_threshold": 600.0, "learning_rate": 0.05,
    "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
  }
})json";

}  // namespace

std::vector<std::string> canonical_scenario_names() {
    return {"homogeneous", "heterogeneous-130-50-20", "straggler-30pct", "straggler-70pct"};
}

nlohmann::json canonical_scenario(const std::string& name) {
    const char* text = nullptr;
    if (name == "homogeneous") text = kHomogeneous;
    else if (name == "heterogeneous-130-50-20") text = kHeterogeneous;
    else if (name == "straggler-30pct") text = kStraggler30;
    else if (name == "straggler-70pct") text = kStraggler70;
    if (!text) throw ParseError("unknown bundled scenario: " + name);
    return nlohmann::json::parse(text);
}

}  // namespace flsim
