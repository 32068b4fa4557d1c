#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdchoice/rng.hpp"

namespace kdchoice {

enum class Strategy {
    KdChoice,  // k balls into the k least-loaded of d sampled slots
    OptimalKd, // k balls water-filled over the distinct sampled bins
};

enum class TieBreak {
    LowestBinIndex,
    RandomAmongTies,
};

struct ProcessParams {
    std::uint32_t n = 0; // bins
    std::uint64_t m = 0; // balls
    std::uint32_t k = 1; // balls per round
    std::uint32_t d = 2; // samples per round
    Strategy strategy = Strategy::KdChoice;
    TieBreak tie_break = TieBreak::LowestBinIndex;
    std::uint64_t seed = 0;

    void validate() const {
        if (n == 0) throw std::invalid_argument("ProcessParams: n must be positive");
        if (m == 0) throw std::invalid_argument("ProcessParams: m must be positive");
        if (k == 0) throw std::invalid_argument("ProcessParams: k must be positive");
        if (k >= d) throw std::invalid_argument("ProcessParams: requires k < d");
        if (d > n) throw std::invalid_argument("ProcessParams: requires d <= n");
    }

    std::uint64_t rounds() const { return (m + k - 1) / k; }
};

// Per-bin ball counts plus the ball-height histogram. The height of a ball is
// one more than the balls already in its bin when it lands.
struct LoadState {
    std::vector<std::uint32_t> loads;
    std::vector<std::uint64_t> height_counts; // [y] = balls of height exactly y; [0] unused
    std::uint64_t balls_placed = 0;
    std::uint64_t messages_sent = 0;

    explicit LoadState(std::uint32_t n) : loads(n, 0), height_counts(1, 0) {}

    std::uint32_t bins() const { return static_cast<std::uint32_t>(loads.size()); }

    void place_ball(std::uint32_t bin) {
        const std::uint32_t height = ++loads[bin];
        if (height >= height_counts.size()) height_counts.resize(height + 1, 0);
        ++height_counts[height];
        ++balls_placed;
    }
};

struct RoundSample {
    std::vector<std::uint32_t> slots; // d bin indices, duplicates allowed
};

struct Placement {
    std::uint32_t bin = 0;
    std::uint32_t balls = 0;
    friend bool operator==(const Placement&, const Placement&) = default;
};

namespace detail {

// Selects the k winning slot positions: the slots whose bins carry the
// smallest load, judged against the loads passed in (frozen at round start).
// Ties among equal-load slots follow the tie-break policy. `order` is reused
// scratch; winners are appended to `winners`.
inline void select_winning_slots(std::span<const std::uint32_t> slots,
                                 const std::vector<std::uint32_t>& loads, std::uint32_t k,
                                 TieBreak tie_break, Rng* rng, std::vector<std::uint32_t>& order,
                                 std::vector<std::uint32_t>& winners) {
    const auto d = static_cast<std::uint32_t>(slots.size());
    order.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const std::uint32_t la = loads[slots[a]];
        const std::uint32_t lb = loads[slots[b]];
        if (la != lb) return la < lb;
        return slots[a] < slots[b];
    });

    winners.clear();
    if (tie_break == TieBreak::LowestBinIndex) {
        winners.assign(order.begin(), order.begin() + k);
        return;
    }

    // RandomAmongTies: slots strictly below the boundary load always win;
    // the remaining quota is drawn uniformly from the boundary-load group.
    if (rng == nullptr) {
        throw std::invalid_argument("select_winning_slots: RandomAmongTies needs an Rng");
    }
    const std::uint32_t boundary_load = loads[slots[order[k - 1]]];
    std::uint32_t sure = 0;
    while (sure < k && loads[slots[order[sure]]] < boundary_load) ++sure;
    std::uint32_t group_end = sure;
    while (group_end < d && loads[slots[order[group_end]]] == boundary_load) ++group_end;

    winners.assign(order.begin(), order.begin() + sure);
    // partial Fisher-Yates over the boundary group
    const std::uint32_t need = k - sure;
    for (std::uint32_t i = 0; i < need; ++i) {
        const std::uint32_t j = sure + i + rng->next_index(group_end - sure - i);
        std::swap(order[sure + i], order[j]);
        winners.push_back(order[sure + i]);
    }
}

// Turns winning slot positions into per-bin placements and applies them.
// A bin that won t slots receives t balls with consecutive heights.
inline void apply_winners(LoadState& state, std::span<const std::uint32_t> slots,
                          std::vector<std::uint32_t>& winners,
                          std::vector<Placement>* placements) {
    std::sort(winners.begin(), winners.end(),
              [&](std::uint32_t a, std::uint32_t b) { return slots[a] < slots[b]; });
    std::size_t i = 0;
    while (i < winners.size()) {
        const std::uint32_t bin = slots[winners[i]];
        std::uint32_t balls = 0;
        while (i < winners.size() && slots[winners[i]] == bin) {
            ++balls;
            ++i;
        }
        for (std::uint32_t b = 0; b < balls; ++b) state.place_ball(bin);
        if (placements != nullptr) placements->push_back({bin, balls});
    }
}

} // namespace detail

// One (k,d)-choice round: exactly k balls, one per winning slot, judged by
// loads at round start. Returns the placements ordered by bin index.
inline std::vector<Placement> run_round(LoadState& state, const RoundSample& sample,
                                        std::uint32_t k, TieBreak tie_break, Rng& rng) {
    if (sample.slots.size() < k) {
        throw std::invalid_argument("run_round: sample needs at least k slots");
    }
    for (const std::uint32_t s : sample.slots) {
        if (s >= state.bins()) throw std::invalid_argument("run_round: slot out of range");
    }
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> winners;
    detail::select_winning_slots(sample.slots, state.loads, k, tie_break, &rng, order, winners);
    std::vector<Placement> placements;
    detail::apply_winners(state, sample.slots, winners, &placements);
    return placements;
}

// Optimal variant: k balls distributed over the distinct sampled bins by
// water-filling, so the heaviest candidate ends as low as possible. Counts
// balls placed earlier in the same round; ties go to the lowest bin index.
inline std::vector<Placement> run_optimal_round(LoadState& state, const RoundSample& sample,
                                                std::uint32_t k) {
    if (sample.slots.empty()) {
        throw std::invalid_argument("run_optimal_round: sample must be non-empty");
    }
    for (const std::uint32_t s : sample.slots) {
        if (s >= state.bins()) throw std::invalid_argument("run_optimal_round: slot out of range");
    }
    std::vector<std::uint32_t> bins(sample.slots.begin(), sample.slots.end());
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());

    struct Candidate {
        std::uint64_t level;
        std::uint32_t bin;
        std::uint32_t received;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(bins.size());
    for (const std::uint32_t b : bins) candidates.push_back({state.loads[b], b, 0});

    const auto heavier = [](const Candidate& a, const Candidate& b) {
        if (a.level != b.level) return a.level > b.level;
        return a.bin > b.bin; // min-heap on (level, bin)
    };
    std::make_heap(candidates.begin(), candidates.end(), heavier);
    for (std::uint32_t ball = 0; ball < k; ++ball) {
        std::pop_heap(candidates.begin(), candidates.end(), heavier);
        Candidate& c = candidates.back();
        ++c.level;
        ++c.received;
        std::push_heap(candidates.begin(), candidates.end(), heavier);
    }

    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.bin < b.bin; });
    std::vector<Placement> placements;
    for (const Candidate& c : candidates) {
        if (c.received == 0) continue;
        for (std::uint32_t b = 0; b < c.received; ++b) state.place_ball(c.bin);
        placements.push_back({c.bin, c.received});
    }
    return placements;
}

// Runs the full allocation: ceil(m/k) rounds of d samples each; the final
// round places the m mod k remainder into the least-loaded slots. Every
// round costs d messages. Deterministic in (params, seed).
inline LoadState run_process(const ProcessParams& params) {
    params.validate();
    Rng rng(params.seed);
    LoadState state(params.n);
    const std::uint64_t rounds = params.rounds();

    RoundSample sample;
    sample.slots.resize(params.d);
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> winners;
    for (std::uint64_t r = 0; r < rounds; ++r) {
        for (std::uint32_t& s : sample.slots) s = rng.next_index(params.n);
        const auto balls = static_cast<std::uint32_t>(
            r + 1 < rounds ? params.k : params.m - params.k * r);
        if (params.strategy == Strategy::KdChoice) {
            detail::select_winning_slots(sample.slots, state.loads, balls, params.tie_break,
                                         &rng, order, winners);
            detail::apply_winners(state, sample.slots, winners, nullptr);
        } else {
            run_optimal_round(state, sample, balls);
        }
        state.messages_sent += params.d;
    }
    return state;
}

// Classic single-choice baseline: every ball lands in one uniform bin.
// One bin query per ball, so messages_sent == m.
inline LoadState run_single_choice(std::uint32_t n, std::uint64_t m, std::uint64_t seed) {
    if (n == 0 || m == 0) {
        throw std::invalid_argument("run_single_choice: n and m must be positive");
    }
    Rng rng(seed);
    LoadState state(n);
    for (std::uint64_t i = 0; i < m; ++i) state.place_ball(rng.next_index(n));
    state.messages_sent = m;
    return state;
}

} // namespace kdchoice
