#include "flsim/fedlesscan.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace flsim;
using namespace flsim::fedlesscan;

namespace {

ClientProfile profile_of(ClientId id) {
    ClientProfile p;
    p.id = id;
    p.cardinality = 100;
    p.batch_size = 10;
    return p;
}

}  // namespace

TEST_CASE("cooldown follows the doubling chain") {
    ClientHistory h;
    update_cooldown(h, false, 2);
    CHECK(h.cooldown == 1);
    CHECK(h.missed_rounds == std::vector<int>{2});

    update_cooldown(h, false, 4);
    CHECK(h.cooldown == 2);
    CHECK(h.missed_rounds == std::vector<int>{2, 4});

    update_cooldown(h, true, 5);
    CHECK(h.cooldown == 0);
    CHECK(h.missed_rounds == std::vector<int>{2, 4});
}

TEST_CASE("cooldown after m consecutive misses is 2^(m-1)") {
    ClientHistory h;
    for (int m = 1; m <= 8; ++m) {
        update_cooldown(h, false, m);
        CHECK(h.cooldown == (1 << (m - 1)));
    }
    update_cooldown(h, true, 9);
    CHECK(h.cooldown == 0);
}

TEST_CASE("tier partition covers the pool disjointly") {
    std::vector<ClientProfile> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(profile_of(i));
    std::vector<ClientHistory> histories(6);

    SUBCASE("fresh pool is all rookies") {
        const TierPartition tiers = partition_tiers(pool, histories);
        CHECK(tiers.rookies.size() == 6);
        CHECK(tiers.participants.empty());
        CHECK(tiers.stragglers.empty());
    }

    SUBCASE("cooldown defines stragglers, history defines participants") {
        for (auto& h : histories) {
            h.invocation_count = 1;
            h.durations = {10.0};
        }
        histories[2].cooldown = 2;
        const TierPartition tiers = partition_tiers(pool, histories);
        CHECK(tiers.rookies.empty());
        CHECK(tiers.stragglers == std::vector<ClientId>{2});
        CHECK(tiers.participants.size() == 5);
    }

    SUBCASE("random histories always partition") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            for (auto& h : histories) {
                h.invocation_count = static_cast<int>(rng() % 3);
                h.cooldown = static_cast<int>(rng() % 3);
            }
            const TierPartition tiers = partition_tiers(pool, histories);
            std::set<ClientId> all;
            for (ClientId c : tiers.rookies) all.insert(c);
            for (ClientId c : tiers.participants) all.insert(c);
            for (ClientId c : tiers.stragglers) all.insert(c);
            CHECK(all.size() == 6);
            CHECK(tiers.rookies.size() + tiers.participants.size() +
                      tiers.stragglers.size() ==
                  6);
        }
    }
}

TEST_CASE("training EMA weights recent rounds highest") {
    CHECK(training_ema({50.0}, 0.5) == 50.0);
    CHECK(training_ema({30.0, 50.0}, 0.5) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(training_ema({10.0, 20.0, 40.0}, 0.5) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(training_ema({}, 0.5), NoHistory);
}

TEST_CASE("missed-round EMA decays as training progresses") {
    CHECK(missed_round_ema({}, 10, 0.5) == 0.0);
    CHECK(missed_round_ema({5}, 10, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(missed_round_ema({5}, 20, 0.5) == doctest::Approx(0.25).epsilon(1e-12));

    double prev = 1.0;
    for (int round = 6; round < 60; round += 3) {
        const double penalty = missed_round_ema({2, 5}, round, 0.5);
        CHECK(penalty < prev);
        prev = penalty;
    }
    CHECK_THROWS_AS(missed_round_ema({5}, 4, 0.5), InvalidRound);
    CHECK_THROWS_AS(missed_round_ema({0}, 4, 0.5), InvalidRound);
}

TEST_CASE("total EMA folds the penalty at the time scale") {
    CHECK(total_ema(40.0, 0.0, 300.0) == 40.0);
    CHECK(total_ema(40.0, 0.5, 300.0) == doctest::Approx(190.0).epsilon(1e-12));
    // A slightly faster trainer with misses ranks slower overall.
    CHECK(total_ema(40.0, 0.0, 300.0) < total_ema(35.0, 0.5, 300.0));
}

TEST_CASE("rookie fast path samples rookies only") {
    std::vector<ClientProfile> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(profile_of(i));
    std::vector<ClientHistory> histories(10);
    for (int i = 0; i < 4; ++i) {
        histories[i].invocation_count = 1;
        histories[i].durations = {20.0};
    }

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto picks = select_clients(pool, histories, 5, 1, 10, {}, rng);
        CHECK(picks.size() == 5);
        for (ClientId c : picks) CHECK(c >= 4);  // ids 0..3 are veterans
        CHECK(std::set<ClientId>(picks.begin(), picks.end()).size() == 5);
    }
}

TEST_CASE("early rounds draw from the fastest cluster") {
    // five fast and five slow veterans, no rookies, no stragglers
    std::vector<ClientProfile> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(profile_of(i));
    std::vector<ClientHistory> histories(10);
    for (int i = 0; i < 10; ++i) {
        histories[i].invocation_count = 1;
        histories[i].durations = {i < 5 ? 10.0 + 0.1 * i : 100.0 + 0.1 * i};
    }

    Rng rng(8);
    const auto picks = select_clients(pool, histories, 5, 1, 10, {}, rng);
    REQUIRE(picks.size() == 5);
    for (ClientId c : picks) CHECK(c < 5);
}

TEST_CASE("stragglers fill the shortfall only") {
    std::vector<ClientProfile> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(profile_of(i));
    std::vector<ClientHistory> histories(6);
    // 2 rookies, 2 participants, 2 stragglers
    for (int i = 2; i < 6; ++i) {
        histories[i].invocation_count = 2;
        histories[i].durations = {15.0, 18.0};
    }
    histories[4].cooldown = 1;
    histories[5].cooldown = 4;

    Rng rng(12);
    const auto picks = select_clients(pool, histories, 6, 3, 10, {}, rng);
    CHECK(picks.size() == 6);
    const std::set<ClientId> chosen(picks.begin(), picks.end());
    CHECK(chosen.size() == 6);

    // with k = 5 one straggler is left out
    const auto fewer = select_clients(pool, histories, 5, 3, 10, {}, rng);
    CHECK(fewer.size() == 5);
    int straggler_count = 0;
    for (ClientId c : fewer) straggler_count += (c == 4 || c == 5) ? 1 : 0;
    CHECK(straggler_count == 1);
}

TEST_CASE("a sufficient rookie pool short-circuits clustering") {
    // the lone participant carries a missed round from the future; touching
    // its features would throw, so a clean return proves the fast path
    std::vector<ClientProfile> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(profile_of(i));
    std::vector<ClientHistory> histories(6);
    histories[5].invocation_count = 3;
    histories[5].durations = {10.0};
    histories[5].missed_rounds = {99};

    Rng rng(14);
    const auto picks = select_clients(pool, histories, 5, 1, 10, {}, rng);
    CHECK(picks.size() == 5);
    for (ClientId c : picks) CHECK(c < 5);
    CHECK_THROWS_AS(select_clients(pool, histories, 6, 1, 10, {}, rng), InvalidRound);
}

TEST_CASE("selection caps at the pool size") {
    std::vector<ClientProfile> pool;
    for (int i = 0; i < 4; ++i) pool.push_back(profile_of(i));
    std::vector<ClientHistory> histories(4);
    Rng rng(2);
    CHECK(select_clients(pool, histories, 50, 1, 10, {}, rng).size() == 4);
}

TEST_CASE("late arrival clears the miss and unwinds the cooldown") {
    ClientHistory h;
    update_cooldown(h, false, 4);
    REQUIRE(h.cooldown == 1);
    clear_missed_on_late_arrival(h, 4);
    CHECK(h.missed_rounds.empty());
    CHECK(h.cooldown == 0);

    ClientHistory two;
    update_cooldown(two, false, 2);
    update_cooldown(two, false, 4);
    REQUIRE(two.cooldown == 2);
    clear_missed_on_late_arrival(two, 4);
    CHECK(two.missed_rounds == std::vector<int>{2});
    CHECK(two.cooldown == 1);

    CHECK_THROWS_AS(clear_missed_on_late_arrival(two, 7), RoundNotMissed);
}
