#include "flsim/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>

namespace flsim {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) throw ParseError("unknown key '" + it.key() + "' in " + context);
    }
}

const json& require(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError("missing key '" + std::string(key) + "' in " + context);
    return *it;
}

double number_field(const json& obj, const char* key, const std::string& context) {
    const json& v = require(obj, key, context);
    if (!v.is_number()) throw ParseError("field '" + std::string(key) + "' in " + context + " must be a number");
    return v.get<double>();
}

double number_field_or(const json& obj, const char* key, const std::string& context,
                       double fallback) {
    if (!obj.contains(key)) return fallback;
    return number_field(obj, key, context);
}

int int_field(const json& obj, const char* key, const std::string& context) {
    const json& v = require(obj, key, context);
    if (!v.is_number_integer()) throw ParseError("field '" + std::string(key) + "' in " + context + " must be an integer");
    return v.get<int>();
}

int int_field_or(const json& obj, const char* key, const std::string& context, int fallback) {
    if (!obj.contains(key)) return fallback;
    return int_field(obj, key, context);
}

std::string string_field(const json& obj, const char* key, const std::string& context) {
    const json& v = require(obj, key, context);
    if (!v.is_string()) throw ParseError("field '" + std::string(key) + "' in " + context + " must be a string");
    return v.get<std::string>();
}

std::string fmt(const char* format, ...) {
    char buffer[256];
    va_list args;
    va_start(args, format);
    vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

void parse_strategy(const json& block, Scenario& sc) {
    const std::string context = "strategy";
    const std::string name = string_field(block, "name", context);
    try {
        sc.strategy = strategy_from_string(name);
    } catch (const Error& e) {
        throw ParseError(e.what());
    }

    switch (sc.strategy) {
        case StrategyKind::FedAvg:
            check_keys(block, {"name"}, context);
            break;
        case StrategyKind::FedProx:
            check_keys(block, {"name", "prox_mu"}, context);
            sc.sync.prox_mu = number_field_or(block, "prox_mu", context, 0.01);
            break;
        case StrategyKind::FedLesScan: {
            check_keys(block,
                       {"name", "ema_alpha", "tau", "max_training_time", "min_pts",
                        "epsilon_grid"},
                       context);
            sc.fedlesscan.ema_alpha = number_field_or(block, "ema_alpha", context, 0.5);
            sc.fedlesscan.tau = int_field_or(block, "tau", context, 2);
            // The penalty scale defaults to the round timeout, the longest
            // useful training time.
            sc.fedlesscan.max_training_time =
                number_field_or(block, "max_training_time", context, sc.sync.round_timeout);
            sc.fedlesscan.min_pts = int_field_or(block, "min_pts", context, 2);
            if (block.contains("epsilon_grid")) {
                const json& grid = block["epsilon_grid"];
                if (!grid.is_array()) throw ParseError("epsilon_grid must be an array");
                for (const auto& v : grid) {
                    if (!v.is_number()) throw ParseError("epsilon_grid entries must be numbers");
                    sc.fedlesscan.epsilon_grid.push_back(v.get<double>());
                }
            }
            break;
        }
        case StrategyKind::FedBuff: {
            check_keys(block, {"name", "buffer_size", "buffer_ratio", "staleness_max_age"},
                       context);
            if (block.contains("buffer_size") && block.contains("buffer_ratio"))
                throw ParseError("give either buffer_size or buffer_ratio, not both");
            if (block.contains("buffer_ratio")) {
                const double ratio = number_field(block, "buffer_ratio", context);
                if (ratio <= 0.0 || ratio > 1.0)
                    throw ValidationError("buffer_ratio must lie in (0, 1]");
                sc.fedbuff.buffer_size = std::max(
                    1, static_cast<int>(std::ceil(ratio * sc.clients_per_round - 1e-9)));
            } else {
                sc.fedbuff.buffer_size = int_field_or(block, "buffer_size", context, 10);
            }
            sc.fedbuff.staleness = StalenessPolicy::inverse_sqrt(
                int_field_or(block, "staleness_max_age", context, 5));
            break;
        }
        case StrategyKind::Apodotiko:
            check_keys(block, {"name", "rho", "concurrency_ratio", "staleness_max_age"},
                       context);
            sc.apodotiko.rho = number_field_or(block, "rho", context, 0.2);
            sc.apodotiko.concurrency_ratio =
                number_field_or(block, "concurrency_ratio", context, 0.3);
            sc.apodotiko.staleness = StalenessPolicy::inverse_sqrt(
                int_field_or(block, "staleness_max_age", context, 5));
            break;
    }
}

std::vector<std::uint64_t> parse_seeds(const json& run) {
    const json& seeds = require(run, "seeds", "run");
    if (!seeds.is_array() || seeds.empty())
        throw ParseError("run.seeds must be a nonempty array");
    std::vector<std::uint64_t> out;
    for (const auto& s : seeds) {
        if (!s.is_number_integer() || s.get<long long>() < 0)
            throw ParseError("run.seeds entries must be non-negative integers");
        out.push_back(s.get<std::uint64_t>());
    }
    return out;
}

}  // namespace

nlohmann::json load_scenario_document(const std::string& name_or_path) {
    const auto names = canonical_scenario_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end())
        return canonical_scenario(name_or_path);

    std::ifstream file(name_or_path);
    if (!file) throw ParseError("cannot open scenario: " + name_or_path);
    try {
        return json::parse(file);
    } catch (const json::parse_error& e) {
        throw ParseError("invalid scenario JSON in " + name_or_path + ": " + e.what());
    }
}

Scenario scenario_from_document(const nlohmann::json& doc, std::uint64_t seed) {
    if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
    check_keys(doc, {"hardware", "clients", "task", "strategy", "run"}, "scenario");

    Scenario sc;
    sc.seed = seed;

    const json& hardware = require(doc, "hardware", "scenario");
    if (!hardware.is_array() || hardware.empty())
        throw ParseError("hardware must be a nonempty array");
    for (const auto& hw : hardware) {
        check_keys(hw, {"name", "cef_capacity", "cold_penalty", "cost_rate"}, "hardware");
        HardwareClass cls;
        cls.name = string_field(hw, "name", "hardware");
        cls.cef_capacity = number_field(hw, "cef_capacity", "hardware");
        cls.cold_penalty = number_field_or(hw, "cold_penalty", "hardware", 0.0);
        cls.cost_rate = number_field_or(hw, "cost_rate", "hardware", 0.0);
        sc.hardware.push_back(std::move(cls));
    }

    const json& clients = require(doc, "clients", "scenario");
    if (!clients.is_array() || clients.empty())
        throw ParseError("clients must be a nonempty array");
    for (const auto& g : clients) {
        check_keys(g,
                   {"count", "hardware", "cardinality", "epochs", "batch_size",
                    "dropout_prob", "slow_factor"},
                   "clients");
        ClientGroup group;
        group.count = int_field(g, "count", "clients");
        group.hardware = string_field(g, "hardware", "clients");
        const json& card = require(g, "cardinality", "clients");
        if (card.is_array() && card.size() == 2 && card[0].is_number_integer() &&
            card[1].is_number_integer()) {
            group.cardinality_lo = card[0].get<int>();
            group.cardinality_hi = card[1].get<int>();
        } else if (card.is_number_integer()) {
            group.cardinality_lo = group.cardinality_hi = card.get<int>();
        } else {
            throw ParseError("cardinality must be an integer or a [lo, hi] pair");
        }
        group.epochs = int_field_or(g, "epochs", "clients", 1);
        group.batch_size = int_field_or(g, "batch_size", "clients", 10);
        group.dropout_prob = number_field_or(g, "dropout_prob", "clients", 0.0);
        group.slow_factor = number_field_or(g, "slow_factor", "clients", 0.0);
        if (group.count < 1) throw ValidationError("client group count must be >= 1");
        if (group.cardinality_lo > group.cardinality_hi)
            throw ValidationError("cardinality range is inverted");
        sc.groups.push_back(std::move(group));
    }

    const json& task = require(doc, "task", "scenario");
    check_keys(task, {"dim", "spread", "seed"}, "task");
    sc.task_dim = int_field(task, "dim", "task");
    sc.task_spread = number_field_or(task, "spread", "task", 1.0);
    sc.task_seed = static_cast<std::uint64_t>(int_field_or(task, "seed", "task", 0));

    const json& run = require(doc, "run", "scenario");
    check_keys(run,
               {"clients_per_round", "max_rounds", "target_loss", "round_timeout",
                "idle_threshold", "learning_rate", "seeds", "cost_per_invocation"},
               "run");
    sc.clients_per_round = int_field(run, "clients_per_round", "run");
    sc.max_rounds = int_field(run, "max_rounds", "run");
    if (run.contains("target_loss")) sc.target_loss = number_field(run, "target_loss", "run");
    sc.sync.round_timeout = number_field_or(run, "round_timeout", "run", 300.0);
    sc.idle_threshold = number_field_or(run, "idle_threshold", "run", 600.0);
    sc.learning_rate = number_field_or(run, "learning_rate", "run", 0.05);
    sc.cost_per_invocation = number_field_or(run, "cost_per_invocation", "run", 4e-7);

    parse_strategy(require(doc, "strategy", "scenario"), sc);

    try {
        resolve_clients(sc);
        validate_scenario(sc);
    } catch (const ScenarioInvalid& e) {
        throw ValidationError(e.what());
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    return sc;
}

std::vector<Scenario> parse_scenario(const std::string& name_or_path) {
    const json doc = load_scenario_document(name_or_path);
    const std::vector<std::uint64_t> seeds = parse_seeds(require(doc, "run", "scenario"));
    std::vector<Scenario> scenarios;
    scenarios.reserve(seeds.size());
    for (std::uint64_t seed : seeds) scenarios.push_back(scenario_from_document(doc, seed));
    return scenarios;
}

nlohmann::json serialize_scenario(const Scenario& sc) {
    json doc;
    json hardware = json::array();
    for (const auto& hw : sc.hardware)
        hardware.push_back({{"name", hw.name},
                            {"cef_capacity", hw.cef_capacity},
                            {"cold_penalty", hw.cold_penalty},
                            {"cost_rate", hw.cost_rate}});
    doc["hardware"] = std::move(hardware);

    json groups = json::array();
    for (const auto& g : sc.groups)
        groups.push_back({{"count", g.count},
                          {"hardware", g.hardware},
                          {"cardinality", {g.cardinality_lo, g.cardinality_hi}},
                          {"epochs", g.epochs},
                          {"batch_size", g.batch_size},
                          {"dropout_prob", g.dropout_prob},
                          {"slow_factor", g.slow_factor}});
    doc["clients"] = std::move(groups);

    doc["task"] = {{"dim", sc.task_dim},
                   {"spread", sc.task_spread},
                   {"seed", sc.task_seed}};

    json strategy{{"name", to_string(sc.strategy)}};
    switch (sc.strategy) {
        case StrategyKind::FedAvg: break;
        case StrategyKind::FedProx:
            strategy["prox_mu"] = sc.sync.prox_mu;
            break;
        case StrategyKind::FedLesScan:
            strategy["ema_alpha"] = sc.fedlesscan.ema_alpha;
            strategy["tau"] = sc.fedlesscan.tau;
            strategy["max_training_time"] = sc.fedlesscan.max_training_time;
            strategy["min_pts"] = sc.fedlesscan.min_pts;
            if (!sc.fedlesscan.epsilon_grid.empty())
                strategy["epsilon_grid"] = sc.fedlesscan.epsilon_grid;
            break;
        case StrategyKind::FedBuff:
            strategy["buffer_size"] = sc.fedbuff.buffer_size;
            strategy["staleness_max_age"] = sc.fedbuff.staleness.max_age;
            break;
        case StrategyKind::Apodotiko:
            strategy["rho"] = sc.apodotiko.rho;
            strategy["concurrency_ratio"] = sc.apodotiko.concurrency_ratio;
            strategy["staleness_max_age"] = sc.apodotiko.staleness.max_age;
            break;
    }
    doc["strategy"] = std::move(strategy);

    json run{{"clients_per_round", sc.clients_per_round},
             {"max_rounds", sc.max_rounds},
             {"round_timeout", sc.sync.round_timeout},
             {"idle_threshold", sc.idle_threshold},
             {"learning_rate", sc.learning_rate},
             {"cost_per_invocation", sc.cost_per_invocation},
             {"seeds", {sc.seed}}};
    if (sc.target_loss) run["target_loss"] = *sc.target_loss;
    doc["run"] = std::move(run);
    return doc;
}

RunSummary summarize(const Scenario& scenario, const RunResult& result) {
    RunSummary s;
    s.seed = scenario.seed;
    s.final_loss = result.final_loss;
    s.reached_target = result.reached_target;
    if (scenario.target_loss)
        s.time_to_target = time_to_target(result.loss_trace, *scenario.target_loss);
    s.total_time = result.end_time;
    s.rounds_run = result.rounds_run;
    s.cost = estimate_cost(result.events, scenario.clients,
                           CostParams{scenario.cost_per_invocation});
    s.bias = selection_bias(result.invocation_counts);
    s.cold_start_ratio = cold_start_ratio(result.events);
    double eur_sum = 0.0;
    for (const auto& r : result.rounds) eur_sum += r.eur;
    s.mean_eur = result.rounds.empty() ? 0.0 : eur_sum / result.rounds.size();
    s.dispatches = result.dispatches;
    s.completions = result.completions;
    s.misses = result.misses;
    s.invocation_histogram = result.invocation_counts;
    return s;
}

std::string format_events(const std::vector<LoggedEvent>& events) {
    std::string out;
    out.reserve(events.size() * 64);
    for (const auto& ev : events) {
        out += fmt("t=%.6f\tkind=%s\tclient=%d\tround=%d", ev.time,
                   to_string(ev.kind).c_str(), ev.client, ev.round);
        switch (ev.kind) {
            case EventKind::Dispatch:
                out += fmt("\tcold=%d", ev.cold ? 1 : 0);
                break;
            case EventKind::Completion:
                out += fmt("\tdur=%.6f", ev.duration);
                break;
            case EventKind::AggregationCheck:
                out += fmt("\tcount=%d\tstale=%d", ev.aggregated, ev.stale);
                break;
            default:
                break;
        }
        out += '\n';
    }
    return out;
}

std::string format_rounds(const std::vector<RoundRecord>& rounds) {
    std::string out = "round\tselected\tsuccessful\teur\tcold\tloss\tsim_time\n";
    for (const auto& r : rounds)
        out += fmt("%d\t%d\t%d\t%.6f\t%d\t%.12g\t%.6f\n", r.round, r.selected,
                   r.successful, r.eur, r.cold, r.loss_after, r.end_time);
    return out;
}

nlohmann::json summary_to_json(const Scenario& scenario, const RunSummary& summary) {
    json j;
    j["seed"] = summary.seed;
    j["config"] = serialize_scenario(scenario);
    j["final_loss"] = summary.final_loss;
    j["reached_target"] = summary.reached_target;
    if (summary.time_to_target)
        j["time_to_target"] = *summary.time_to_target;
    else
        j["time_to_target"] = nullptr;
    j["total_time"] = summary.total_time;
    j["rounds_run"] = summary.rounds_run;
    j["cost"] = summary.cost;
    j["bias"] = summary.bias;
    j["cold_start_ratio"] = summary.cold_start_ratio;
    j["mean_eur"] = summary.mean_eur;
    j["dispatches"] = summary.dispatches;
    j["completions"] = summary.completions;
    j["misses"] = summary.misses;
    j["invocation_histogram"] = summary.invocation_histogram;
    return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot write " + path.string());
    file << content;
}

}  // namespace

RunSummary run_to_directory(const Scenario& scenario,
                            const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const RunResult result = simulate(scenario);
    const RunSummary summary = summarize(scenario, result);
    write_file(out_dir / "events.log", format_events(result.events));
    write_file(out_dir / "rounds.tsv", format_rounds(result.rounds));
    write_file(out_dir / "summary.json", summary_to_json(scenario, summary).dump(2) + "\n");
    return summary;
}

namespace {

std::vector<std::uint64_t> effective_seeds(const nlohmann::json& doc,
                                           const std::vector<std::uint64_t>& override_seeds) {
    if (!override_seeds.empty()) return override_seeds;
    return parse_seeds(require(doc, "run", "scenario"));
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / values.size();
}

}  // namespace

std::vector<RunSummary> cmd_run(const std::string& scenario_ref,
                                const std::filesystem::path& out_dir,
                                const std::vector<std::uint64_t>& seed_override) {
    const json doc = load_scenario_document(scenario_ref);
    std::vector<RunSummary> summaries;
    for (std::uint64_t seed : effective_seeds(doc, seed_override)) {
        const Scenario sc = scenario_from_document(doc, seed);
        summaries.push_back(
            run_to_directory(sc, out_dir / ("seed-" + std::to_string(seed))));
    }
    return summaries;
}

CompareTable cmd_compare(const std::string& scenario_ref,
                         const std::vector<std::string>& strategies,
                         const std::filesystem::path& out_dir,
                         const std::vector<std::uint64_t>& seed_override) {
    if (strategies.size() < 2)
        throw ValidationError("compare needs at least two strategies");
    const json doc = load_scenario_document(scenario_ref);
    const auto seeds = effective_seeds(doc, seed_override);

    CompareTable table;
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        StrategyKind kind;
        try {
            kind = strategy_from_string(strategies[i]);
        } catch (const Error& e) {
            throw ValidationError(e.what());
        }
        std::vector<RunSummary> runs;
        for (std::uint64_t seed : seeds) {
            Scenario sc = scenario_from_document(doc, seed);
            sc.strategy = kind;
            const auto dir = out_dir / (std::to_string(i) + "-" + strategies[i]) /
                             ("seed-" + std::to_string(seed));
            runs.push_back(run_to_directory(sc, dir));
        }

        CompareRow row;
        row.strategy = strategies[i];
        std::vector<double> reached, costs, biases, colds, eurs;
        for (const auto& r : runs) {
            if (r.time_to_target)
                reached.push_back(*r.time_to_target);
            else
                ++row.unreached_seeds;
            costs.push_back(r.cost);
            biases.push_back(static_cast<double>(r.bias));
            colds.push_back(r.cold_start_ratio);
            eurs.push_back(r.mean_eur);
        }
        if (!reached.empty()) row.mean_time_to_target = mean(reached);
        row.mean_cost = mean(costs);
        row.mean_bias = mean(biases);
        row.mean_cold_start_ratio = mean(colds);
        row.mean_eur = mean(eurs);
        table.per_strategy.push_back(std::move(runs));
        table.rows.push_back(std::move(row));
    }

    // Speedup: geometric mean of per-seed time ratios against the first
    // strategy, over seeds both reached. A seed both strategies reach at
    // time zero counts as ratio one.
    const auto& baseline = table.per_strategy.front();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double log_sum = 0.0;
        int common = 0;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const auto& base = baseline[s].time_to_target;
            const auto& mine = table.per_strategy[i][s].time_to_target;
            if (!base || !mine) continue;
            if (*mine > 0.0 && *base > 0.0) {
                log_sum += std::log(*base / *mine);
                ++common;
            } else if (*mine == *base) {
                ++common;  // log ratio 0
            }
        }
        if (common > 0) table.rows[i].speedup_vs_first = std::exp(log_sum / common);
    }

    write_file(out_dir / "compare.tsv", format_compare_table(table));
    return table;
}

void apply_sweep_parameter(Scenario& scenario, const std::string& parameter,
                           double value) {
    if (parameter == "concurrency_ratio") {
        scenario.apodotiko.concurrency_ratio = value;
    } else if (parameter == "clients_per_round") {
        scenario.clients_per_round = static_cast<int>(std::lround(value));
    } else if (parameter == "rho") {
        scenario.apodotiko.rho = value;
    } else if (parameter == "buffer_size") {
        scenario.fedbuff.buffer_size = static_cast<int>(std::lround(value));
    } else {
        throw UnknownParameter("unknown sweep parameter: " + parameter);
    }
}

SweepTable cmd_sweep(const std::string& scenario_ref, const std::string& parameter,
                     const std::vector<double>& values,
                     const std::filesystem::path& out_dir,
                     const std::vector<std::uint64_t>& seed_override) {
    if (values.empty()) throw ValidationError("sweep needs at least one value");
    const json doc = load_scenario_document(scenario_ref);
    const auto seeds = effective_seeds(doc, seed_override);

    SweepTable table;
    table.parameter = parameter;
    for (double value : values) {
        std::vector<RunSummary> runs;
        for (std::uint64_t seed : seeds) {
            Scenario sc = scenario_from_document(doc, seed);
            apply_sweep_parameter(sc, parameter, value);
            try {
                validate_scenario(sc);
            } catch (const ScenarioInvalid& e) {
                throw ValidationError(e.what());
            }
            const auto dir = out_dir / (parameter + "-" + fmt("%.6g", value)) /
                             ("seed-" + std::to_string(seed));
            runs.push_back(run_to_directory(sc, dir));
        }

        SweepRow row;
        row.value = value;
        std::vector<double> reached, costs, biases, colds, eurs;
        for (const auto& r : runs) {
            if (r.time_to_target)
                reached.push_back(*r.time_to_target);
            else
                ++row.unreached_seeds;
            costs.push_back(r.cost);
            biases.push_back(static_cast<double>(r.bias));
            colds.push_back(r.cold_start_ratio);
            eurs.push_back(r.mean_eur);
        }
        if (!reached.empty()) row.mean_time_to_target = mean(reached);
        row.mean_cost = mean(costs);
        row.mean_bias = mean(biases);
        row.mean_cold_start_ratio = mean(colds);
        row.mean_eur = mean(eurs);
        table.per_value.push_back(std::move(runs));
        table.rows.push_back(std::move(row));
    }

    write_file(out_dir / "sweep.tsv", format_sweep_table(table));
    return table;
}

std::string format_compare_table(const CompareTable& table) {
    std::string out =
        "strategy\ttime_to_target\tunreached\tspeedup\tcost\tbias\tcold_start_ratio\tmean_eur\n";
    for (const auto& r : table.rows) {
        out += r.strategy;
        out += r.mean_time_to_target ? fmt("\t%.6f", *r.mean_time_to_target) : "\tunreached";
        out += fmt("\t%d", r.unreached_seeds);
        out += r.speedup_vs_first ? fmt("\t%.2fx", *r.speedup_vs_first) : "\t-";
        out += fmt("\t%.8g\t%.6g\t%.6f\t%.6f\n", r.mean_cost, r.mean_bias,
                   r.mean_cold_start_ratio, r.mean_eur);
    }
    return out;
}

std::string format_sweep_table(const SweepTable& table) {
    std::string out = table.parameter +
                      "\ttime_to_target\tunreached\tcost\tbias\tcold_start_ratio\tmean_eur\n";
    for (const auto& r : table.rows) {
        out += fmt("%.6g", r.value);
        out += r.mean_time_to_target ? fmt("\t%.6f", *r.mean_time_to_target) : "\tunreached";
        out += fmt("\t%d\t%.8g\t%.6g\t%.6f\t%.6f\n", r.unreached_seeds, r.mean_cost,
                   r.mean_bias, r.mean_cold_start_ratio, r.mean_eur);
    }
    return out;
}

}  // namespace flsim
