#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "kdchoice/storage_sim.hpp"

using namespace kdchoice;
using Catch::Approx;

TEST_CASE("candidate sets are a pure function of file id and store seed") {
    const StorageSim a(100, 42);
    const StorageSim b(100, 42);
    const StorageSim c(100, 43);
    for (std::uint64_t id : {0ull, 1ull, 999ull}) {
        CHECK(a.candidates_for(id, 5) == a.candidates_for(id, 5));
        CHECK(a.candidates_for(id, 5) == b.candidates_for(id, 5));
        CHECK(a.candidates_for(id, 5) != c.candidates_for(id, 5));
    }
}

TEST_CASE("insert places copies on the least-loaded candidates") {
    // server 1 starts busy; the first file whose candidates include server 0
    // must store its single copy there
    int mixed_candidate_cases = 0;
    for (std::uint64_t id = 0; id < 20; ++id) {
        StorageSim sim(2, 7);
        for (int i = 0; i < 5; ++i) sim.add_unit(1);
        const FileRecord record = insert_file(sim, id, PlacementMode::Replicate, 1, 2);
        REQUIRE(record.holders.size() == 1);
        if (record.candidates[0] == 0 || record.candidates[1] == 0) {
            ++mixed_candidate_cases;
            CHECK(record.holders[0] == 0);
            CHECK(sim.server_loads()[0] == 1);
        }
    }
    CHECK(mixed_candidate_cases > 0);
}

TEST_CASE("record invariants hold on random inserts") {
    StorageSim sim(64, 99);
    std::uint64_t stored = 0;
    bool saw_duplicate_holder = false;
    for (std::uint64_t id = 0; id < 300; ++id) {
        const std::uint32_t d = 2 + static_cast<std::uint32_t>(id % 7);
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(id % (d - 1));
        const FileRecord record = insert_file(sim, id, PlacementMode::Chunk, k, d);
        stored += k;

        CHECK(record.candidates.size() == d);
        CHECK(record.holders.size() == k);
        CHECK(record.holder_slots.size() == k);
        // holders form a multiset subset of the candidates
        std::multiset<std::uint32_t> cands(record.candidates.begin(), record.candidates.end());
        for (const std::uint32_t h : record.holders) {
            const auto it = cands.find(h);
            REQUIRE(it != cands.end());
            cands.erase(it);
        }
        std::set<std::uint32_t> holder_set(record.holders.begin(), record.holders.end());
        if (holder_set.size() < record.holders.size()) saw_duplicate_holder = true;
    }
    CHECK(sim.total_stored() == stored);
    // duplicate candidate slots can both hold chunks
    CHECK(saw_duplicate_holder);
}

TEST_CASE("insert rejects bad shapes") {
    StorageSim sim(8, 1);
    CHECK_THROWS_AS(insert_file(sim, 0, PlacementMode::Replicate, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(insert_file(sim, 0, PlacementMode::Replicate, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(insert_file(sim, 0, PlacementMode::Replicate, 2, 9), std::invalid_argument);
}

TEST_CASE("two-choice insertion balances the store") {
    const std::uint32_t n = 1u << 16;
    StorageSim sim(n, 2024);
    for (std::uint64_t id = 0; id < n; ++id) {
        insert_file(sim, id, PlacementMode::Replicate, 1, 2);
    }
    const std::uint32_t max_load =
        *std::max_element(sim.server_loads().begin(), sim.server_loads().end());
    const double bound = std::log(std::log(static_cast<double>(n))) / std::log(2.0) + 4.0;
    CHECK(static_cast<double>(max_load) <= bound);
}

TEST_CASE("search probe counts stay within their structural ranges") {
    StorageSim sim(128, 5);
    Rng rng(17);

    SECTION("replicate with k = d-1 needs at most two probes") {
        for (std::uint64_t id = 0; id < 40; ++id) {
            const FileRecord record = insert_file(sim, id, PlacementMode::Replicate, 4, 5);
            for (int s = 0; s < 10; ++s) {
                const std::uint32_t probes = search_file(sim, record, rng);
                CHECK(probes >= 1);
                CHECK(probes <= 2);
            }
        }
    }
    SECTION("chunk mode never exceeds d probes") {
        for (std::uint64_t id = 0; id < 40; ++id) {
            const FileRecord record = insert_file(sim, id, PlacementMode::Chunk, 4, 5);
            for (int s = 0; s < 10; ++s) {
                const std::uint32_t probes = search_file(sim, record, rng);
                CHECK(probes >= 4);
                CHECK(probes <= 5);
            }
        }
    }
}

TEST_CASE("replicate search cost matches the negative-hypergeometric mean") {
    const std::uint32_t k = 3;
    const std::uint32_t d = 8;
    StorageSim sim(256, 31);
    std::vector<FileRecord> records;
    for (std::uint64_t id = 0; id < 200; ++id) {
        records.push_back(insert_file(sim, id, PlacementMode::Replicate, k, d));
    }
    const SearchStats stats = measure_search_cost(sim, records, 50);
    CHECK(stats.searches == 200ull * 50);
    CHECK(stats.mean_probes ==
          Approx(static_cast<double>(stats.total_probes) / stats.searches));

    // exact expectation (d+1)/(k+1) = 2.25; allow a 3-sigma Monte Carlo margin
    const double expectation = replicate_search_expectation(k, d);
    CHECK(expectation == Approx(2.25));
    const double sigma_bound = 3.0 * (d / std::sqrt(static_cast<double>(stats.searches)));
    CHECK(std::abs(stats.mean_probes - expectation) <= sigma_bound);
    // the folklore d/k figure stays an upper estimate
    CHECK(stats.mean_probes <= static_cast<double>(d) / k + 0.05);
}

TEST_CASE("searches are reproducible from the store seed") {
    StorageSim sim_a(64, 11);
    StorageSim sim_b(64, 11);
    std::vector<FileRecord> records_a;
    std::vector<FileRecord> records_b;
    for (std::uint64_t id = 0; id < 30; ++id) {
        records_a.push_back(insert_file(sim_a, id, PlacementMode::Chunk, 2, 4));
        records_b.push_back(insert_file(sim_b, id, PlacementMode::Chunk, 2, 4));
    }
    const SearchStats a = measure_search_cost(sim_a, records_a, 20);
    const SearchStats b = measure_search_cost(sim_b, records_b, 20);
    CHECK(a.total_probes == b.total_probes);
}
