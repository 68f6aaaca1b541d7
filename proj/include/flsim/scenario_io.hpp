#pragma once

#include "flsim/engine.hpp"
#include "flsim/metrics.hpp"
#include "flsim/scenario.hpp"
#include "flsim/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flsim {

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};

struct UnknownParameter : Error {
    explicit UnknownParameter(const std::string& what) : Error(what) {}
};

// Names of the scenarios compiled into the library.
std::vector<std::string> canonical_scenario_names();

// Raw document for a bundled scenario name; throws when unknown.
nlohmann::json canonical_scenario(const std::string& name);

// Loads a scenario document from a bundled name or a filesystem path.
nlohmann::json load_scenario_document(const std::string& name_or_path);

// Resolves one document + seed into a runnable scenario. Defaults are
// applied; unknown keys are rejected.
Scenario scenario_from_document(const nlohmann::json& document, std::uint64_t seed);

// Fan-out: one resolved scenario per listed seed.
std::vector<Scenario> parse_scenario(const std::string& name_or_path);

// Full resolved configuration of one scenario, seeds = [scenario.seed].
// parse(serialize(s)) resolves back to an identical scenario.
nlohmann::json serialize_scenario(const Scenario& scenario);

// Per-run aggregate written into summary.json next to the raw artifacts.
struct RunSummary {
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    std::optional<double> time_to_target;
    bool reached_target = false;
    double total_time = 0.0;
    int rounds_run = 0;
    double cost = 0.0;
    int bias = 0;
    double cold_start_ratio = 0.0;
    double mean_eur = 0.0;
    long dispatches = 0;
    long completions = 0;
    long misses = 0;
    std::vector<int> invocation_histogram;
};

RunSummary summarize(const Scenario& scenario, const RunResult& result);

// Serialized artifact forms (also written to disk by the commands).
std::string format_events(const std::vector<LoggedEvent>& events);
std::string format_rounds(const std::vector<RoundRecord>& rounds);
nlohmann::json summary_to_json(const Scenario& scenario, const RunSummary& summary);

// Runs one resolved scenario and writes events.log, rounds.tsv and
// summary.json under out_dir/seed-<seed>/.
RunSummary run_to_directory(const Scenario& scenario,
                            const std::filesystem::path& out_dir);

// Runs every seed of the scenario into out_dir. Nonexistent directories are
// created.
std::vector<RunSummary> cmd_run(const std::string& scenario_ref,
                                const std::filesystem::path& out_dir,
                                const std::vector<std::uint64_t>& seed_override = {});

struct CompareRow {
    std::string strategy;
    std::optional<double> mean_time_to_target;  // over seeds that reached
    int unreached_seeds = 0;
    std::optional<double> speedup_vs_first;  // geometric mean of per-seed ratios
    double mean_cost = 0.0;
    double mean_bias = 0.0;
    double mean_cold_start_ratio = 0.0;
    double mean_eur = 0.0;
};

struct CompareTable {
    std::vector<CompareRow> rows;
    std::vector<std::vector<RunSummary>> per_strategy;  // parallel to rows
};

// Runs each strategy on identical pools, task and seeds; writes per-run
// artifacts under out_dir/<index>-<strategy>/ and a compare.tsv table.
CompareTable cmd_compare(const std::string& scenario_ref,
                         const std::vector<std::string>& strategies,
                         const std::filesystem::path& out_dir,
                         const std::vector<std::uint64_t>& seed_override = {});

struct SweepRow {
    double value = 0.0;
    std::optional<double> mean_time_to_target;
    int unreached_seeds = 0;
    double mean_cost = 0.0;
    double mean_bias = 0.0;
    double mean_cold_start_ratio = 0.0;
    double mean_eur = 0.0;
};

struct SweepTable {
    std::string parameter;
    std::vector<SweepRow> rows;
    std::vector<std::vector<RunSummary>> per_value;  // parallel to rows
};

// Overridable sweep knobs: concurrency_ratio, clients_per_round, rho,
// buffer_size.
void apply_sweep_parameter(Scenario& scenario, const std::string& parameter,
                           double value);

SweepTable cmd_sweep(const std::string& scenario_ref, const std::string& parameter,
                     const std::vector<double>& values,
                     const std::filesystem::path& out_dir,
                     const std::vector<std::uint64_t>& seed_override = {});

std::string format_compare_table(const CompareTable& table);
std::string format_sweep_table(const SweepTable& table);

}  // namespace flsim
