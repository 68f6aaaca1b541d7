#include "flsim/metrics.hpp"

#include <algorithm>
#include <map>

namespace flsim {

double eur(int selected, int successful) {
    if (selected < 1) throw NoSelection();
    if (successful < 0 || successful > selected)
        throw Error("successful count must lie in [0, selected]");
    return static_cast<double>(successful) / selected;
}

int selection_bias(const std::vector<int>& invocation_counts) {
    if (invocation_counts.empty()) throw EmptyPool();
    const auto [lo, hi] =
        std::minmax_element(invocation_counts.begin(), invocation_counts.end());
    return *hi - *lo;
}

double cold_start_ratio(std::span<const LoggedEvent> events) {
    long dispatches = 0;
    long cold = 0;
    for (const auto& ev : events) {
        if (ev.kind != EventKind::Dispatch) continue;
        ++dispatches;
        if (ev.cold) ++cold;
    }
    if (dispatches == 0) throw NoDispatches();
    return static_cast<double>(cold) / static_cast<double>(dispatches);
}

double estimate_cost(std::span<const LoggedEvent> events,
                     const std::vector<ClientProfile>& profiles,
                     const CostParams& params) {
    if (events.empty()) return 0.0;
    const double end_time = events.back().time;

    // One invocation per (client, round); a dispatch is closed by its
    // completion or miss, or runs to the end of the log.
    std::map<std::pair<ClientId, int>, double> open_dispatches;
    double cost = 0.0;
    for (const auto& ev : events) {
        const auto key = std::make_pair(ev.client, ev.round);
        switch (ev.kind) {
            case EventKind::Dispatch:
                cost += params.per_invocation;
                open_dispatches[key] = ev.time;
                break;
            case EventKind::Completion:
                cost += ev.duration * profiles[ev.client].hardware.cost_rate;
                open_dispatches.erase(key);
                break;
            case EventKind::Miss: {
                auto it = open_dispatches.find(key);
                if (it != open_dispatches.end()) {
                    cost += (ev.time - it->second) * profiles[ev.client].hardware.cost_rate;
                    open_dispatches.erase(it);
                }
                break;
            }
            default:
                break;
        }
    }
    for (const auto& [key, start] : open_dispatches)
        cost += (end_time - start) * profiles[key.first].hardware.cost_rate;
    return cost;
}

std::optional<double> time_to_target(
    const std::vector<std::pair<double, double>>& loss_trace, double target_loss) {
    for (const auto& [time, loss] : loss_trace)
        if (loss <= target_loss) return time;
    return std::nullopt;
}

}  // namespace flsim
