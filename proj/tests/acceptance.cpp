// Acceptance suite: every run criterion prints one PASS/FAIL line; the
// process exits nonzero if any criterion fails.

#include "flsim/aggregation.hpp"
#include "flsim/apodotiko.hpp"
#include "flsim/clustering.hpp"
#include "flsim/engine.hpp"
#include "flsim/fedlesscan.hpp"
#include "flsim/metrics.hpp"
#include "flsim/scenario_io.hpp"
#include "flsim/task.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <vector>

using namespace flsim;
namespace fs = std::filesystem;

namespace {

// Loss level used for time-to-target readings on the heterogeneous
// scenario. It sits above the asynchronous strategy's damped-aggregation
// equilibrium (~1.8) and well below the initial loss (~2.9), so every
// strategy crosses it while runs continue to their fixed horizon.
constexpr double kHeterogeneousTarget = 1.9;

struct Harness {
    int failed = 0;

    void criterion(int number, const std::string& name,
                   const std::function<bool()>& body) {
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        std::string note;
        try {
            ok = body();
        } catch (const std::exception& e) {
            note = std::string(" (exception: ") + e.what() + ")";
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::printf("%s criterion %2d: %s [%.2fs]%s\n", ok ? "PASS" : "FAIL", number,
                    name.c_str(), seconds, note.c_str());
        if (!ok) ++failed;
        std::fflush(stdout);
    }
};

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<UpdateRecord> random_updates(std::mt19937_64& rng, int count, int round,
                                         bool fresh) {
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    std::vector<UpdateRecord> updates;
    for (int i = 0; i < count; ++i) {
        Vector v(4);
        for (int d = 0; d < 4; ++d) v(d) = coord(rng);
        const int age = fresh ? 0 : static_cast<int>(rng() % 3);
        updates.push_back(
            {i, round - age, v, 1 + static_cast<int>(rng() % 40), 0.0});
    }
    return updates;
}

Scenario heterogeneous_scenario(std::uint64_t seed, StrategyKind strategy,
                                double concurrency_ratio = 0.3) {
    Scenario sc = scenario_from_document(
        canonical_scenario("heterogeneous-130-50-20"), seed);
    sc.strategy = strategy;
    sc.apodotiko.concurrency_ratio = concurrency_ratio;
    return sc;
}

bool same_file_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    const std::string ca((std::istreambuf_iterator<char>(fa)),
                         std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(fb)),
                         std::istreambuf_iterator<char>());
    return ca == cb;
}

}  // namespace

int main() {
    Harness h;
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    // Shared heterogeneous runs feed criteria 10, 11, 13 and 15.
    std::vector<RunResult> het_apodotiko, het_fedavg, het_cr06, het_cr08;

    h.criterion(1, "damped aggregation of fresh updates equals plain averaging", [&] {
        std::mt19937_64 rng(2024);
        for (int trial = 0; trial < 200; ++trial) {
            const int round = 1 + static_cast<int>(rng() % 30);
            const auto updates =
                random_updates(rng, 1 + static_cast<int>(rng() % 20), round, true);
            const Vector base = weighted_fedavg(updates);
            const Vector lin =
                aggregate_stale(updates, round, StalenessPolicy::linear_ratio(2));
            const Vector inv =
                aggregate_stale(updates, round, StalenessPolicy::inverse_sqrt(5));
            if ((lin - base).norm() > 1e-12) return false;
            if ((inv - base).norm() > 1e-12) return false;
        }
        return true;
    });

    h.criterion(2, "inverse-sqrt weight is diagonal-consistent, linear ratio drifts", [&] {
        for (int staleness = 0; staleness <= 5; ++staleness) {
            const double reference =
                staleness_weight_inverse_sqrt(1 - staleness, 1);
            for (int t = 1; t <= 1000; ++t)
                if (staleness_weight_inverse_sqrt(t - staleness, t) != reference)
                    return false;
        }
        double prev = 0.0;
        for (int t = 2; t <= 1000; ++t) {
            const double w = staleness_weight_linear_ratio(t - 1, t);
            if (w <= prev) return false;
            prev = w;
        }
        return true;
    });

    h.criterion(3, "efficiency score matches an independent recomputation", [&] {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> duration(0.2, 800.0);
        std::uniform_real_distribution<double> rho(0.05, 1.0);
        std::uniform_real_distribution<double> booster(1.0, 6.0);
        for (int trial = 0; trial < 1000; ++trial) {
            ClientHistory history;
            history.durations.resize(1 + rng() % 25);
            for (auto& d : history.durations) d = duration(rng);
            history.booster = booster(rng);
            history.invocation_count = static_cast<int>(history.durations.size());
            ClientProfile profile;
            profile.cardinality = 1 + static_cast<int>(rng() % 600);
            profile.batch_size = 1 + static_cast<int>(rng() % 40);
            profile.epochs = 1 + static_cast<int>(rng() % 10);
            apodotiko::Config config;
            config.rho = rho(rng);

            const double expected = test::reference_score(
                history.durations, history.booster, profile.cardinality,
                profile.epochs, profile.batch_size, config.rho);
            const double actual = apodotiko::calculate_score(history, profile, config);
            if (std::abs(actual - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
                return false;
        }
        return true;
    });

    h.criterion(4, "selection probabilities are normalized, uniform and tracked", [&] {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> score(1e-3, 1e3);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> scores(2 + rng() % 30);
            for (auto& s : scores) s = score(rng);
            const auto table = apodotiko::normalize_scores(scores);
            double sum = 0.0;
            for (double p : table.probability) sum += p;
            if (std::abs(sum - 1.0) > 1e-9) return false;
        }

        // equal scores: single picks uniform over 10 clients
        std::vector<ClientProfile> pool(10);
        for (int i = 0; i < 10; ++i) {
            pool[i].id = i;
            pool[i].cardinality = 100;
            pool[i].batch_size = 10;
        }
        Rng draw_rng(5);
        std::vector<int> counts(10, 0);
        const int trials = 100000;
        for (int t = 0; t < trials; ++t) {
            std::vector<ClientHistory> histories(10);
            for (auto& hh : histories) {
                hh.durations = {25.0};
                hh.invocation_count = 1;
            }
            ++counts[apodotiko::select_clients(pool, histories, 1, {}, draw_rng)[0]];
        }
        double chi2 = 0.0;
        const double expected = trials / 10.0;
        for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
        if (chi2 >= test::chi2_critical_99(9)) return false;

        // weighted single picks track the probability table within 0.02
        std::vector<double> durations{10.0, 14.0, 21.0, 30.0, 44.0, 65.0};
        std::vector<ClientProfile> wpool(6);
        for (int i = 0; i < 6; ++i) {
            wpool[i].id = i;
            wpool[i].cardinality = 100;
            wpool[i].batch_size = 10;
        }
        std::vector<double> scores;
        for (int i = 0; i < 6; ++i) {
            ClientHistory hh;
            hh.durations = {durations[i]};
            hh.invocation_count = 1;
            scores.push_back(apodotiko::calculate_score(hh, wpool[i], {}));
        }
        const auto table = apodotiko::normalize_scores(scores);
        std::vector<int> picks(6, 0);
        for (int t = 0; t < trials; ++t) {
            std::vector<ClientHistory> histories(6);
            for (int i = 0; i < 6; ++i) {
                histories[i].durations = {durations[i]};
                histories[i].invocation_count = 1;
            }
            ++picks[apodotiko::select_clients(wpool, histories, 1, {}, draw_rng)[0]];
        }
        for (int i = 0; i < 6; ++i) {
            const double freq = picks[i] / static_cast<double>(trials);
            if (std::abs(freq - table.probability[i]) > 0.02) return false;
        }
        return true;
    });

    h.criterion(5, "booster keeps a 10x slower client in rotation", [&] {
        int seeds_with_selection = 0;
        int seeds_with_scored_selection = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            Scenario sc;
            sc.hardware = {{"fast", 1.0, 2.0, 1e-4}, {"slow", 0.1, 2.0, 1e-4}};
            sc.groups = {{19, "fast", 100, 100, 1, 10, 0.0, 0.0},
                         {1, "slow", 100, 100, 1, 10, 0.0, 0.0}};
            sc.task_dim = 2;
            sc.task_spread = 0.5;
            sc.task_seed = 7;
            sc.strategy = StrategyKind::Apodotiko;
            sc.apodotiko.concurrency_ratio = 1.0;  // synchronous degenerate case
            sc.clients_per_round = 5;
            sc.max_rounds = 200;
            sc.sync.round_timeout = 2000.0;
            sc.learning_rate = 0.05;
            sc.seed = seed;
            resolve_clients(sc);

            const RunResult result = simulate(sc);
            bool selected = false, scored_phase = false;
            for (const auto& ev : result.events) {
                if (ev.kind != EventKind::Dispatch || ev.client != 19) continue;
                selected = true;
                if (ev.round > 4) scored_phase = true;  // past the rookie sweep
            }
            seeds_with_selection += selected ? 1 : 0;
            seeds_with_scored_selection += scored_phase ? 1 : 0;
        }
        return seeds_with_selection >= 95 && seeds_with_scored_selection >= 95;
    });

    h.criterion(6, "cooldown chain doubles on misses and resets on completion", [&] {
        ClientHistory history;
        fedlesscan::update_cooldown(history, false, 1);
        if (history.cooldown != 1) return false;
        fedlesscan::update_cooldown(history, false, 2);
        if (history.cooldown != 2) return false;
        fedlesscan::update_cooldown(history, false, 3);
        if (history.cooldown != 4) return false;
        fedlesscan::update_cooldown(history, true, 4);
        return history.cooldown == 0;
    });

    h.criterion(7, "density clustering matches a brute-force oracle", [&] {
        std::mt19937_64 rng(31337);
        std::uniform_real_distribution<double> coord(0.0, 10.0);
        std::uniform_real_distribution<double> eps(0.3, 3.0);
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<FeaturePoint> points(1 + rng() % 64);
            for (auto& p : points) p = FeaturePoint(coord(rng), coord(rng));
            const double epsilon = eps(rng);
            const int min_pts = 1 + static_cast<int>(rng() % 4);
            if (!test::same_partition(dbscan(points, epsilon, min_pts),
                                      test::reference_dbscan(points, epsilon, min_pts)))
                return false;
        }
        return true;
    });

    h.criterion(8, "cluster quality index reproduces the hand-derived value", [&] {
        const std::vector<FeaturePoint> points{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
        return calinski_harabasz(points, {0, 0, 1, 1}) == 200.0;
    });

    h.criterion(9, "full-participation averaging converges to the direct solve", [&] {
        Scenario sc;
        sc.hardware = {{"cpu", 1.0, 0.0, 0.0}};
        sc.groups = {{10, "cpu", 32, 32, 1, 32, 0.0, 0.0}};  // one step per round
        sc.task_dim = 4;
        sc.task_spread = 1.0;
        sc.task_seed = 12345;
        sc.strategy = StrategyKind::FedAvg;
        sc.clients_per_round = 10;
        sc.max_rounds = 5000;
        sc.sync.round_timeout = 1000.0;
        sc.seed = 1;
        resolve_clients(sc);

        std::vector<int> cards(10, 32);
        const FederatedTask task = generate_task(10, 4, 1.0, cards, 12345);
        double lambda_max = 0.0;
        for (const auto& a : task.curvature) {
            Eigen::SelfAdjointEigenSolver<Matrix> eigen(a);
            lambda_max = std::max(lambda_max, eigen.eigenvalues().maxCoeff());
        }
        sc.learning_rate = 0.5 / lambda_max;
        const double optimum_loss = global_loss(task, closed_form_optimum(task));
        sc.target_loss = optimum_loss + 1e-6;

        const RunResult result = simulate(sc);
        return result.reached_target &&
               static_cast<int>(result.loss_trace.size()) <= 5001;
    });

    h.criterion(10, "apodotiko reaches the target at >= 1.5x geometric-mean speedup", [&] {
        double log_sum = 0.0;
        for (std::uint64_t seed : seeds) {
            het_apodotiko.push_back(
                simulate(heterogeneous_scenario(seed, StrategyKind::Apodotiko)));
            het_fedavg.push_back(
                simulate(heterogeneous_scenario(seed, StrategyKind::FedAvg)));
            const auto t_apo =
                time_to_target(het_apodotiko.back().loss_trace, kHeterogeneousTarget);
            const auto t_avg =
                time_to_target(het_fedavg.back().loss_trace, kHeterogeneousTarget);
            if (!t_apo || !t_avg) return false;
            log_sum += std::log(*t_avg / *t_apo);
        }
        const double speedup = std::exp(log_sum / seeds.size());
        std::printf("      geometric-mean speedup: %.2fx\n", speedup);
        return speedup >= 1.5;
    });

    h.criterion(11, "apodotiko at most halves the cold-start ratio of averaging", [&] {
        std::vector<double> apo, avg;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            apo.push_back(cold_start_ratio(het_apodotiko[i].events));
            avg.push_back(cold_start_ratio(het_fedavg[i].events));
        }
        const double med_apo = median(apo), med_avg = median(avg);
        std::printf("      median cold ratios: apodotiko %.4f, fedavg %.4f\n", med_apo,
                    med_avg);
        return med_apo <= 0.5 * med_avg;
    });

    h.criterion(12, "tiered selection sustains higher round utilization", [&] {
        double scan_sum = 0.0, avg_sum = 0.0;
        for (std::uint64_t seed : seeds) {
            Scenario scan = scenario_from_document(
                canonical_scenario("straggler-30pct"), seed);
            Scenario avg = scan;
            avg.strategy = StrategyKind::FedAvg;
            const RunResult scan_run = simulate(scan);
            const RunResult avg_run = simulate(avg);
            const auto mean_eur = [](const RunResult& r) {
                double sum = 0.0;
                for (const auto& rec : r.rounds) sum += rec.eur;
                return sum / r.rounds.size();
            };
            scan_sum += mean_eur(scan_run);
            avg_sum += mean_eur(avg_run);
        }
        std::printf("      mean EUR: fedlesscan %.4f, fedavg %.4f\n",
                    scan_sum / seeds.size(), avg_sum / seeds.size());
        return scan_sum >= avg_sum;
    });

    h.criterion(13, "a 0.3 concurrency ratio converges fastest in >= 7 of 10 seeds", [&] {
        int wins = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            het_cr06.push_back(simulate(
                heterogeneous_scenario(seeds[i], StrategyKind::Apodotiko, 0.6)));
            het_cr08.push_back(simulate(
                heterogeneous_scenario(seeds[i], StrategyKind::Apodotiko, 0.8)));
            const auto t03 =
                time_to_target(het_apodotiko[i].loss_trace, kHeterogeneousTarget);
            const auto t06 =
                time_to_target(het_cr06.back().loss_trace, kHeterogeneousTarget);
            const auto t08 =
                time_to_target(het_cr08.back().loss_trace, kHeterogeneousTarget);
            if (!t03) return false;
            const bool beats06 = !t06 || *t03 <= *t06;
            const bool beats08 = !t08 || *t03 <= *t08;
            wins += (beats06 && beats08) ? 1 : 0;
        }
        std::printf("      CR 0.3 fastest in %d of 10 seeds\n", wins);
        return wins >= 7;
    });

    h.criterion(14, "identical scenario and seed produce byte-identical artifacts", [&] {
        const fs::path base = fs::temp_directory_path() / "flsim-acceptance";
        fs::remove_all(base);
        for (const auto& name : canonical_scenario_names()) {
            const fs::path a = base / name / "a";
            const fs::path b = base / name / "b";
            const auto first = cmd_run(name, a);
            const auto second = cmd_run(name, b);
            if (first.size() != second.size()) return false;
            for (const auto& summary : first) {
                const std::string seed_dir = "seed-" + std::to_string(summary.seed);
                for (const char* artifact : {"events.log", "rounds.tsv", "summary.json"})
                    if (!same_file_bytes(a / seed_dir / artifact, b / seed_dir / artifact))
                        return false;
            }
        }
        return true;
    });

    h.criterion(15, "selection bias stays flat on equals and widens on a GPU mix", [&] {
        int homogeneous_wider = 0;
        for (std::uint64_t seed : seeds) {
            Scenario apo =
                scenario_from_document(canonical_scenario("homogeneous"), seed);
            Scenario avg = apo;
            avg.strategy = StrategyKind::FedAvg;
            const int apo_spread = selection_bias(simulate(apo).invocation_counts);
            const int avg_spread = selection_bias(simulate(avg).invocation_counts);
            homogeneous_wider += apo_spread > avg_spread ? 1 : 0;
        }
        int heterogeneous_wider = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const int apo_spread =
                selection_bias(het_apodotiko[i].invocation_counts);
            const int avg_spread = selection_bias(het_fedavg[i].invocation_counts);
            heterogeneous_wider += apo_spread > avg_spread ? 1 : 0;
        }
        std::printf("      apodotiko wider spread: homogeneous %d/10, heterogeneous %d/10\n",
                    homogeneous_wider, heterogeneous_wider);
        return homogeneous_wider <= 3 && heterogeneous_wider >= 7;
    });

    if (h.failed == 0) {
        std::printf("all %d criteria passed\n", 15);
        return 0;
    }
    std::printf("%d criteria FAILED\n", h.failed);
    return 1;
}
