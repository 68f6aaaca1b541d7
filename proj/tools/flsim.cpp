#include "flsim/scenario_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::string describe(const flsim::RunSummary& s) {
    char buffer[256];
    std::string target = s.time_to_target
                             ? std::to_string(*s.time_to_target) + " s"
                             : std::string("unreached");
    snprintf(buffer, sizeof(buffer),
             "seed %llu: rounds=%d final_loss=%.6g time_to_target=%s cost=%.6g "
             "bias=%d cold_ratio=%.4f mean_eur=%.4f",
             static_cast<unsigned long long>(s.seed), s.rounds_run, s.final_loss,
             target.c_str(), s.cost, s.bias, s.cold_start_ratio, s.mean_eur);
    return buffer;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for serverless federated learning strategies"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir = "out";
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> strategies;
    std::string parameter;
    std::vector<double> values;
    bool quiet = false;

    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* run = app.add_subcommand("run", "simulate a scenario for every listed seed");
    run->fallthrough();
    run->add_option("--scenario", scenario, "bundled scenario name or path to a scenario file")
        ->required();
    run->add_option("--out", out_dir, "output directory (created when missing)");
    run->add_option("--seed,--seeds", seeds, "override the scenario's seed list");

    auto* compare =
        app.add_subcommand("compare", "run several strategies on identical pools and seeds");
    compare->fallthrough();
    compare->add_option("--scenario", scenario, "bundled scenario name or path")->required();
    compare->add_option("--strategy", strategies, "strategy name (repeat; first is the baseline)")
        ->required()
        ->expected(-2);
    compare->add_option("--out", out_dir, "output directory");
    compare->add_option("--seed,--seeds", seeds, "override the scenario's seed list");

    auto* sweep = app.add_subcommand("sweep", "rerun a scenario across one parameter's values");
    sweep->fallthrough();
    sweep->add_option("--scenario", scenario, "bundled scenario name or path")->required();
    sweep->add_option("--param", parameter,
                      "concurrency_ratio | clients_per_round | rho | buffer_size")
        ->required();
    sweep->add_option("--values", values, "parameter values to sweep")->required()->expected(-1);
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--seed,--seeds", seeds, "override the scenario's seed list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) {
            const auto summaries = flsim::cmd_run(scenario, out_dir, seeds);
            if (!quiet)
                for (const auto& s : summaries) std::cout << describe(s) << "\n";
        } else if (compare->parsed()) {
            const auto table = flsim::cmd_compare(scenario, strategies, out_dir, seeds);
            if (!quiet) std::cout << flsim::format_compare_table(table);
        } else if (sweep->parsed()) {
            const auto table = flsim::cmd_sweep(scenario, parameter, values, out_dir, seeds);
            if (!quiet) std::cout << flsim::format_sweep_table(table);
        }
    } catch (const flsim::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const flsim::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const flsim::UnknownParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const flsim::ScenarioInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
