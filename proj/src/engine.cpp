#include "flsim/engine.hpp"

#include "flsim/aggregation.hpp"
#include "flsim/task.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

namespace flsim {

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Dispatch: return "dispatch";
        case EventKind::Completion: return "completion";
        case EventKind::Miss: return "miss";
        case EventKind::AggregationCheck: return "aggregate";
        case EventKind::RoundTimeout: return "round_timeout";
    }
    return "unknown";
}

double duration_of(const ClientProfile& profile, long work_units, bool cold, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise = std::exp(profile.slow_factor * gauss(rng));
    double seconds = work_units / profile.hardware.cef_capacity * noise;
    if (cold) seconds += profile.hardware.cold_penalty;
    return seconds;
}

bool is_cold(const std::optional<double>& last_finish_time, double now,
             double idle_threshold) {
    return !last_finish_time || now - *last_finish_time > idle_threshold;
}

void validate_scenario(const Scenario& sc) {
    const int pool_size = static_cast<int>(sc.clients.size());
    if (sc.clients.empty()) throw ScenarioInvalid("client pool is empty");
    for (int i = 0; i < pool_size; ++i) {
        const auto& c = sc.clients[i];
        if (c.id != i) throw ScenarioInvalid("client ids must be 0..n-1 in order");
        if (c.batch_size < 1 || c.epochs < 1)
            throw ScenarioInvalid("epochs and batch size must be >= 1");
        if (c.cardinality < c.batch_size)
            throw ScenarioInvalid("cardinality must be at least the batch size");
        if (c.dropout_prob < 0.0 || c.dropout_prob > 1.0)
            throw ScenarioInvalid("dropout probability must lie in [0, 1]");
        if (c.slow_factor < 0.0) throw ScenarioInvalid("slow factor must be >= 0");
        if (c.hardware.cef_capacity <= 0.0)
            throw ScenarioInvalid("hardware capacity must be positive");
        if (c.hardware.cold_penalty < 0.0 || c.hardware.cost_rate < 0.0)
            throw ScenarioInvalid("hardware penalties and rates must be >= 0");
    }
    if (sc.clients_per_round < 1) throw ScenarioInvalid("clients per round must be >= 1");
    if (sc.clients_per_round > pool_size)
        throw ScenarioInvalid("clients per round exceeds the pool size");
    if (sc.max_rounds < 1) throw ScenarioInvalid("max rounds must be >= 1");
    if (sc.sync.round_timeout <= 0.0) throw ScenarioInvalid("round timeout must be positive");
    if (sc.idle_threshold <= 0.0) throw ScenarioInvalid("idle threshold must be positive");
    if (sc.learning_rate <= 0.0) throw ScenarioInvalid("learning rate must be positive");
    if (sc.task_dim < 1) throw ScenarioInvalid("task dimension must be >= 1");
    if (sc.task_spread < 0.0) throw ScenarioInvalid("task spread must be >= 0");
    if (sc.cost_per_invocation < 0.0)
        throw ScenarioInvalid("per-invocation cost must be >= 0");
    if (sc.apodotiko.rho <= 0.0 || sc.apodotiko.rho > 1.0)
        throw ScenarioInvalid("adjustment rate must lie in (0, 1]");
    if (sc.apodotiko.concurrency_ratio <= 0.0 || sc.apodotiko.concurrency_ratio > 1.0)
        throw ScenarioInvalid("concurrency ratio must lie in (0, 1]");
    if (sc.apodotiko.staleness.max_age < 1 || sc.fedbuff.staleness.max_age < 1)
        throw ScenarioInvalid("staleness horizon must be >= 1");
    if (sc.fedlesscan.ema_alpha <= 0.0 || sc.fedlesscan.ema_alpha > 1.0)
        throw ScenarioInvalid("EMA smoothing must lie in (0, 1]");
    if (sc.fedlesscan.tau < 1) throw ScenarioInvalid("staleness cutoff must be >= 1");
    if (sc.fedlesscan.max_training_time <= 0.0)
        throw ScenarioInvalid("max training time must be positive");
    if (sc.fedlesscan.min_pts < 1) throw ScenarioInvalid("min_pts must be >= 1");
    for (double eps : sc.fedlesscan.epsilon_grid)
        if (eps <= 0.0) throw ScenarioInvalid("epsilon grid values must be positive");
    if (sc.fedbuff.buffer_size < 1) throw ScenarioInvalid("buffer size must be >= 1");
    if (sc.sync.prox_mu < 0.0) throw ScenarioInvalid("proximal coefficient must be >= 0");
}

namespace {

constexpr long kEventBudget = 10'000'000;

struct Invocation {
    ClientId client = 0;
    int round = 0;
    double dispatch_time = 0.0;
    bool crashed = false;
    double duration = 0.0;  // valid when not crashed
    Vector update;
    bool resolved = false;
};

enum { kCompletion = 0, kMiss = 1, kRoundTimeout = 2, kPoll = 3 };

struct QueuedEvent {
    double time;
    long seq;  // FIFO tie-break at equal times
    int type;
    int payload;  // invocation id, or round for timeouts
};

struct LaterFirst {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

struct HorizonStats {
    int in_horizon = 0;
    int stale = 0;  // in-horizon updates from earlier rounds
};

class Simulation {
public:
    explicit Simulation(const Scenario& scenario)
        : sc_(scenario), pool_size_(static_cast<int>(scenario.clients.size())),
          rng_(scenario.seed) {}

    RunResult run() {
        validate_scenario(sc_);
        std::vector<int> cardinalities;
        cardinalities.reserve(pool_size_);
        for (const auto& c : sc_.clients) cardinalities.push_back(c.cardinality);
        task_ = generate_task(pool_size_, sc_.task_dim, sc_.task_spread, cardinalities,
                              sc_.task_seed);

        histories_.assign(pool_size_, ClientHistory{});
        active_.assign(pool_size_, -1);
        successful_by_round_.assign(sc_.max_rounds + 1, 0);
        model_ = Vector::Zero(sc_.task_dim);
        loss_ = global_loss(task_, model_);
        out_.loss_trace.emplace_back(0.0, loss_);

        start_round();
        while (!stopped_) {
            if (queue_.empty())
                throw StoppingRuleUnreachable("event queue drained before the stopping rule");
            const QueuedEvent ev = queue_.top();
            queue_.pop();
            now_ = ev.time;
            if (++events_processed_ > kEventBudget)
                throw StoppingRuleUnreachable("event budget exceeded");
            switch (ev.type) {
                case kCompletion: on_completion(ev.payload); break;
                case kMiss: on_miss(ev.payload); break;
                case kRoundTimeout: on_round_timeout(ev.payload); break;
                case kPoll: on_poll(); break;
            }
        }

        if (!is_sync()) {
            for (auto& rec : out_.rounds) {
                rec.successful = successful_by_round_[rec.round];
                rec.eur = rec.selected > 0
                              ? static_cast<double>(rec.successful) / rec.selected
                              : 0.0;
            }
        }
        out_.end_time = now_;
        out_.final_loss = loss_;
        out_.rounds_run = static_cast<int>(out_.rounds.size());
        out_.reached_target = reached_;
        out_.unresolved = in_flight_;
        out_.invocation_counts.reserve(pool_size_);
        for (const auto& h : histories_) out_.invocation_counts.push_back(h.invocation_count);
        out_.histories = std::move(histories_);
        return std::move(out_);
    }

private:
    bool is_sync() const {
        return sc_.strategy == StrategyKind::FedAvg || sc_.strategy == StrategyKind::FedProx ||
               sc_.strategy == StrategyKind::FedLesScan;
    }

    StalenessPolicy policy() const {
        switch (sc_.strategy) {
            case StrategyKind::FedAvg:
            case StrategyKind::FedProx: return StalenessPolicy::current_only();
            case StrategyKind::FedLesScan:
                return StalenessPolicy::linear_ratio(sc_.fedlesscan.tau);
            case StrategyKind::FedBuff: return sc_.fedbuff.staleness;
            case StrategyKind::Apodotiko: return sc_.apodotiko.staleness;
        }
        return StalenessPolicy::current_only();
    }

    double prox_mu() const {
        return sc_.strategy == StrategyKind::FedProx ? sc_.sync.prox_mu : 0.0;
    }

    void push_event(double time, int type, int payload) {
        queue_.push({time, next_seq_++, type, payload});
    }

    void log(LoggedEvent ev) { out_.events.push_back(std::move(ev)); }

    std::vector<ClientId> select() {
        switch (sc_.strategy) {
            case StrategyKind::FedAvg:
            case StrategyKind::FedProx:
            case StrategyKind::FedBuff:
                return baselines::select_random(sc_.clients, histories_,
                                                sc_.clients_per_round, rng_);
            case StrategyKind::FedLesScan:
                return fedlesscan::select_clients(sc_.clients, histories_,
                                                  sc_.clients_per_round, round_,
                                                  sc_.max_rounds, sc_.fedlesscan, rng_);
            case StrategyKind::Apodotiko:
                return apodotiko::select_clients(sc_.clients, histories_,
                                                 sc_.clients_per_round, sc_.apodotiko, rng_);
        }
        throw ScenarioInvalid("unknown strategy");
    }

    void start_round() {
        round_start_ = now_;
        cur_selected_ = 0;
        cur_successful_ = 0;
        cur_cold_ = 0;
        dispatched_this_round_.assign(pool_size_, false);
        round_invocations_.clear();

        const std::vector<ClientId> selection = select();
        for (ClientId c : selection) dispatch(c);
        cur_selected_ = static_cast<int>(selection.size());
        if (is_sync()) push_event(round_start_ + sc_.sync.round_timeout, kRoundTimeout, round_);
    }

    void dispatch(ClientId c) {
        auto& h = histories_[c];
        const auto& profile = sc_.clients[c];
        const bool cold = is_cold(h.last_finish_time, now_, sc_.idle_threshold);
        h.mark_busy();

        const int inv_id = static_cast<int>(invocations_.size());
        active_[c] = inv_id;
        dispatched_this_round_[c] = true;
        cur_cold_ += cold ? 1 : 0;
        ++out_.dispatches;
        log({now_, EventKind::Dispatch, c, round_, cold, 0.0, 0, 0});

        auto trained = local_train(task_, c, model_, profile.epochs, profile.batch_size,
                                   sc_.learning_rate, prox_mu(), model_);
        Invocation inv;
        inv.client = c;
        inv.round = round_;
        inv.dispatch_time = now_;
        inv.update = std::move(trained.params);
        inv.crashed = std::bernoulli_distribution(profile.dropout_prob)(rng_);
        if (!inv.crashed) {
            inv.duration = duration_of(profile, trained.work_units, cold, rng_);
            push_event(now_ + inv.duration, kCompletion, inv_id);
        } else if (!is_sync()) {
            // A crashed invocation is declared dead after one timeout span.
            push_event(now_ + sc_.sync.round_timeout, kMiss, inv_id);
        }
        ++in_flight_;
        round_invocations_.push_back(inv_id);
        invocations_.push_back(std::move(inv));
    }

    HorizonStats horizon_stats(const StalenessPolicy& p) const {
        HorizonStats stats;
        for (const auto& u : pending_) {
            if (!within_staleness_horizon(u.origin_round, round_, p)) continue;
            ++stats.in_horizon;
            if (u.origin_round < round_) ++stats.stale;
        }
        return stats;
    }

    void on_completion(int inv_id) {
        auto& inv = invocations_[inv_id];
        auto& h = histories_[inv.client];
        const bool active = active_[inv.client] == inv_id;

        log({now_, EventKind::Completion, inv.client, inv.round, false, inv.duration, 0, 0});
        ++out_.completions;
        inv.resolved = true;
        --in_flight_;

        if (active) {
            h.record_completion(inv.duration, now_);
            fedlesscan::update_cooldown(h, true, inv.round);
            active_[inv.client] = -1;
        } else {
            // Late arrival: the round already declared this client missed.
            h.durations.insert(h.durations.begin(), inv.duration);
            h.last_finish_time = now_;
            if (sc_.strategy == StrategyKind::FedLesScan &&
                std::find(h.missed_rounds.begin(), h.missed_rounds.end(), inv.round) !=
                    h.missed_rounds.end())
                fedlesscan::clear_missed_on_late_arrival(h, inv.round);
        }
        // Synchronous rounds only credit in-time arrivals; under the
        // asynchronous pipelines every arrival still feeds an aggregation, so
        // it counts toward the round that invoked it.
        if (is_sync()) {
            if (inv.round == round_) ++cur_successful_;
        } else {
            ++successful_by_round_[inv.round];
        }

        UpdateRecord update{inv.client, inv.round, inv.update,
                            sc_.clients[inv.client].cardinality, now_};
        out_.update_store.push_back(update);

        if (is_sync()) {
            pending_.push_back(std::move(update));
            if (cur_successful_ == cur_selected_) close_sync_round();
        } else {
            async_arrival(std::move(update));
        }
    }

    void on_miss(int inv_id) {
        auto& inv = invocations_[inv_id];
        auto& h = histories_[inv.client];
        inv.resolved = true;
        --in_flight_;
        ++out_.misses;
        log({now_, EventKind::Miss, inv.client, inv.round, false, 0.0, 0, 0});
        fedlesscan::update_cooldown(h, false, inv.round);
        h.status = InvocationStatus::Available;
        active_[inv.client] = -1;

        if (!is_sync()) schedule_poll();
    }

    void on_round_timeout(int round_no) {
        if (!is_sync() || round_no != round_) return;  // round already closed
        log({now_, EventKind::RoundTimeout, -1, round_no, false, 0.0, 0, 0});
        close_sync_round();
    }

    void close_sync_round() {
        // Everyone still outstanding has missed the round. Crashed
        // invocations die here; slow ones will still deliver late.
        for (int inv_id : round_invocations_) {
            auto& inv = invocations_[inv_id];
            if (inv.resolved) continue;
            auto& h = histories_[inv.client];
            fedlesscan::update_cooldown(h, false, inv.round);
            h.status = InvocationStatus::Available;
            active_[inv.client] = -1;
            if (inv.crashed) {
                inv.resolved = true;
                --in_flight_;
                ++out_.misses;
                log({now_, EventKind::Miss, inv.client, inv.round, false, 0.0, 0, 0});
            }
        }

        const StalenessPolicy p = policy();
        const HorizonStats stats = horizon_stats(p);
        int consumed = 0;
        if (stats.in_horizon > 0) {
            adopt_model(aggregate_stale(pending_, round_, p));
            consumed = stats.in_horizon;
        }
        pending_.clear();
        finish_round(consumed, consumed > 0 ? stats.stale : 0);
    }

    // Aggregation decisions run on a same-timestamp poll queued behind every
    // simultaneous arrival, so a burst of equal-time completions feeds one
    // trigger check instead of several.
    void schedule_poll() {
        if (poll_scheduled_) return;
        poll_scheduled_ = true;
        push_event(now_, kPoll, 0);
    }

    void async_arrival(UpdateRecord update) {
        if (sc_.strategy == StrategyKind::FedBuff) {
            const StalenessPolicy& p = sc_.fedbuff.staleness;
            HorizonStats stats = horizon_stats(p);
            if (within_staleness_horizon(update.origin_round, round_, p)) {
                ++stats.in_horizon;
                if (update.origin_round < round_) ++stats.stale;
            }
            auto emitted = baselines::fedbuff_step(pending_, std::move(update),
                                                   sc_.fedbuff, round_);
            if (emitted) {
                adopt_model(std::move(*emitted));
                finish_round(stats.in_horizon, stats.stale);
                return;
            }
        } else {
            pending_.push_back(std::move(update));
        }
        schedule_poll();
    }

    void on_poll() {
        poll_scheduled_ = false;
        if (sc_.strategy == StrategyKind::Apodotiko &&
            apodotiko::should_aggregate(static_cast<int>(pending_.size()),
                                        sc_.clients_per_round, sc_.apodotiko)) {
            const HorizonStats stats = horizon_stats(sc_.apodotiko.staleness);
            if (stats.in_horizon > 0) {
                adopt_model(aggregate_stale(pending_, round_, sc_.apodotiko.staleness));
                pending_.clear();
                finish_round(stats.in_horizon, stats.stale);
                return;
            }
            pending_.clear();  // nothing usable survived the horizon
        }
        if (in_flight_ == 0) stalled_flush();
    }

    // No arrivals can come anymore: fold in whatever is usable, or roll the
    // round forward so freed clients get dispatched again.
    void stalled_flush() {
        const StalenessPolicy p = policy();
        const HorizonStats stats = horizon_stats(p);
        if (stats.in_horizon > 0) {
            adopt_model(aggregate_stale(pending_, round_, p));
            pending_.clear();
            finish_round(stats.in_horizon, stats.stale);
        } else {
            pending_.clear();
            finish_round(0, 0);
        }
    }

    void adopt_model(ModelParams next) {
        model_ = std::move(next);
        loss_ = global_loss(task_, model_);
        out_.loss_trace.emplace_back(now_, loss_);
    }

    void finish_round(int consumed, int stale) {
        log({now_, EventKind::AggregationCheck, -1, round_, false, 0.0, consumed, stale});
        RoundRecord record;
        record.round = round_;
        record.selected = cur_selected_;
        record.successful = cur_successful_;
        record.cold = cur_cold_;
        record.stale_included = stale;
        record.eur = cur_selected_ > 0
                         ? static_cast<double>(cur_successful_) / cur_selected_
                         : 0.0;
        record.loss_after = loss_;
        record.end_time = now_;
        out_.rounds.push_back(record);

        for (int c = 0; c < pool_size_; ++c)
            if (!dispatched_this_round_[c] && histories_[c].cooldown > 0)
                --histories_[c].cooldown;

        if (sc_.target_loss && loss_ <= *sc_.target_loss) {
            stopped_ = true;
            reached_ = true;
        } else if (round_ >= sc_.max_rounds) {
            stopped_ = true;
        } else {
            ++round_;
            start_round();
        }
    }

    const Scenario& sc_;
    int pool_size_;
    Rng rng_;

    FederatedTask task_;
    std::vector<ClientHistory> histories_;
    std::vector<int> active_;  // per client: invocation id while busy, else -1
    Vector model_;
    double loss_ = 0.0;

    std::vector<UpdateRecord> pending_;
    std::vector<Invocation> invocations_;
    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, LaterFirst> queue_;
    long next_seq_ = 0;
    long events_processed_ = 0;
    int in_flight_ = 0;
    bool poll_scheduled_ = false;

    double now_ = 0.0;
    int round_ = 1;
    double round_start_ = 0.0;
    int cur_selected_ = 0;
    int cur_successful_ = 0;
    int cur_cold_ = 0;
    std::vector<int> successful_by_round_;  // async: arrivals credited to origin
    std::vector<bool> dispatched_this_round_;
    std::vector<int> round_invocations_;

    bool stopped_ = false;
    bool reached_ = false;
    RunResult out_;
};

}  // namespace

RunResult simulate(const Scenario& scenario) { return Simulation(scenario).run(); }

}  // namespace flsim
