#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "kdchoice/process.hpp"
#include "kdchoice/rng.hpp"

namespace kdchoice {

enum class PlacementMode {
    Replicate, // k copies; a search needs any one of them
    Chunk,     // k chunks; a search needs all of them
};

// A file's candidate set is a pure function of (file id, store seed), so a
// search can re-derive it without a directory lookup. Holders are the k
// least-loaded candidate slots at insert time; duplicate candidate slots may
// both hold data.
struct FileRecord {
    std::uint64_t file_id = 0;
    PlacementMode mode = PlacementMode::Replicate;
    std::vector<std::uint32_t> candidates;  // d server slots (duplicates allowed)
    std::vector<std::uint32_t> holders;     // k servers, multiset subset of candidates
    std::vector<std::uint32_t> holder_slots; // positions in `candidates` that hold data
};

class StorageSim {
public:
    StorageSim(std::uint32_t servers, std::uint64_t seed) : load_(servers, 0), seed_(seed) {
        if (servers == 0) throw std::invalid_argument("StorageSim: servers must be positive");
    }

    std::uint32_t servers() const { return static_cast<std::uint32_t>(load_.size()); }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint32_t>& server_loads() const { return load_; }

    std::uint64_t total_stored() const {
        return std::accumulate(load_.begin(), load_.end(), std::uint64_t{0});
    }

    std::vector<std::uint32_t> candidates_for(std::uint64_t file_id, std::uint32_t d) const {
        Rng rng(mix64(seed_ ^ mix64(file_id)));
        std::vector<std::uint32_t> candidates(d);
        for (std::uint32_t& c : candidates) c = rng.next_index(servers());
        return candidates;
    }

    void add_unit(std::uint32_t server) { ++load_[server]; }

private:
    std::vector<std::uint32_t> load_;
    std::uint64_t seed_;
};

// Draws the d candidate servers for the file and stores its k copies/chunks
// on the k least-loaded candidate slots (lowest server index on ties).
inline FileRecord insert_file(StorageSim& sim, std::uint64_t file_id, PlacementMode mode,
                              std::uint32_t k, std::uint32_t d) {
    if (k == 0 || k >= d) throw std::invalid_argument("insert_file: requires 1 <= k < d");
    if (d > sim.servers()) throw std::invalid_argument("insert_file: requires d <= servers");

    FileRecord record;
    record.file_id = file_id;
    record.mode = mode;
    record.candidates = sim.candidates_for(file_id, d);

    std::vector<std::uint32_t> order;
    detail::select_winning_slots(record.candidates, sim.server_loads(), k,
                                 TieBreak::LowestBinIndex, nullptr, order, record.holder_slots);
    std::sort(record.holder_slots.begin(), record.holder_slots.end());
    record.holders.reserve(k);
    for (const std::uint32_t slot : record.holder_slots) {
        record.holders.push_back(record.candidates[slot]);
        sim.add_unit(record.candidates[slot]);
    }
    return record;
}

// Probes the candidate slots in uniformly random order without replacement.
// Replicate: stops at the first holder slot. Chunk: stops once every holder
// slot has been seen. Returns the number of probes spent.
inline std::uint32_t search_file(const StorageSim&, const FileRecord& record, Rng& rng) {
    const auto d = static_cast<std::uint32_t>(record.candidates.size());
    std::vector<std::uint8_t> is_holder(d, 0);
    for (const std::uint32_t slot : record.holder_slots) is_holder[slot] = 1;

    std::vector<std::uint32_t> order(d);
    for (std::uint32_t i = 0; i < d; ++i) order[i] = i;
    for (std::uint32_t i = 0; i + 1 < d; ++i) {
        const std::uint32_t j = i + rng.next_index(d - i);
        std::swap(order[i], order[j]);
    }

    auto remaining = static_cast<std::uint32_t>(record.holder_slots.size());
    std::uint32_t probes = 0;
    for (const std::uint32_t slot : order) {
        ++probes;
        if (!is_holder[slot]) continue;
        if (record.mode == PlacementMode::Replicate) return probes;
        if (--remaining == 0) return probes;
    }
    return probes; // unreachable for well-formed records
}

struct SearchStats {
    std::uint64_t searches = 0;
    std::uint64_t total_probes = 0;
    double mean_probes = 0.0;
};

// Monte Carlo mean probe count over all records. The probe order stream is
// derived from the store seed, so results are reproducible.
inline SearchStats measure_search_cost(const StorageSim& sim,
                                       const std::vector<FileRecord>& records,
                                       std::uint32_t searches_per_record) {
    if (records.empty()) throw std::invalid_argument("measure_search_cost: no records");
    if (searches_per_record == 0) {
        throw std::invalid_argument("measure_search_cost: searches_per_record must be positive");
    }
    Rng rng(stream_seed(sim.seed(), 0, StreamLane::Search));
    SearchStats stats;
    for (const FileRecord& record : records) {
        for (std::uint32_t s = 0; s < searches_per_record; ++s) {
            stats.total_probes += search_file(sim, record, rng);
            ++stats.searches;
        }
    }
    stats.mean_probes =
        static_cast<double>(stats.total_probes) / static_cast<double>(stats.searches);
    return stats;
}

// Exact expected probe count for Replicate search in random order:
// (d+1)/(k+1). The d/k folklore figure is an upper estimate of it.
inline double replicate_search_expectation(std::uint32_t k, std::uint32_t d) {
    return (static_cast<double>(d) + 1.0) / (static_cast<double>(k) + 1.0);
}

} // namespace kdchoice
