#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kdchoice/process.hpp"

namespace kdchoice {

// Loads sorted non-increasing; bin identities are discarded. b.front() is the
// maximum load.
struct LoadVectorView {
    std::vector<std::uint32_t> b;

    std::uint32_t size() const { return static_cast<std::uint32_t>(b.size()); }
    // 1-based access, matching the "x-th most loaded bin" convention
    std::uint32_t at_rank(std::uint32_t x) const { return b.at(x - 1); }
};

inline LoadVectorView load_vector(const LoadState& state) {
    LoadVectorView view;
    view.b = state.loads;
    std::sort(view.b.begin(), view.b.end(), std::greater<>());
    return view;
}

// Number of bins holding at least y balls.
inline std::uint64_t nu_y(const LoadVectorView& view, std::uint32_t y) {
    // sorted descending: first position with b < y ends the count
    const auto it = std::lower_bound(view.b.begin(), view.b.end(), y, std::greater_equal<>());
    return static_cast<std::uint64_t>(it - view.b.begin());
}

// Number of balls with height at least y, read off the height histogram.
inline std::uint64_t mu_y(const LoadState& state, std::uint32_t y) {
    if (y == 0) return state.balls_placed;
    std::uint64_t count = 0;
    for (std::size_t h = y; h < state.height_counts.size(); ++h) count += state.height_counts[h];
    return count;
}

// First rank where the (k,d) vector strictly exceeds the single-choice one,
// minus 1; n when the (k,d) vector never exceeds. A single paired trial is a
// noisy estimate; aggregate across trials with the median.
inline std::uint32_t empirical_intersection(const LoadVectorView& kd,
                                            const LoadVectorView& single_choice) {
    if (kd.size() != single_choice.size()) {
        throw std::invalid_argument("empirical_intersection: vectors must have the same n");
    }
    for (std::uint32_t i = 0; i < kd.size(); ++i) {
        if (kd.b[i] > single_choice.b[i]) return i; // 1-based rank i+1, minus one
    }
    return kd.size();
}

struct DecompositionResult {
    std::uint32_t x_hat = 0;      // crossing index used as the anchor
    std::uint32_t y_star_emp = 0; // load at the anchor
    std::uint32_t y_hat_emp = 0;  // gap between max load and the anchor load
    std::uint32_t max_load = 0;
};

// Splits the maximum load at the analytic crossing point: max = y_star + y_hat
// by construction.
inline DecompositionResult decompose(const LoadVectorView& view, std::uint32_t x_star_analytic) {
    if (x_star_analytic < 1 || x_star_analytic > view.size()) {
        throw std::invalid_argument("decompose: x_star out of range");
    }
    DecompositionResult out;
    out.x_hat = x_star_analytic;
    out.max_load = view.at_rank(1);
    out.y_star_emp = view.at_rank(x_star_analytic);
    out.y_hat_emp = out.max_load - out.y_star_emp;
    return out;
}

// Fraction of trials whose x-th most loaded bin holds at least s balls.
inline double exceed_frequency(const std::vector<LoadVectorView>& trials, std::uint32_t x,
                               std::uint32_t s) {
    if (trials.empty()) throw std::invalid_argument("exceed_frequency: no trials");
    std::uint64_t count = 0;
    for (const LoadVectorView& view : trials) {
        if (view.at_rank(x) >= s) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(trials.size());
}

struct DominanceProbe {
    std::uint32_t x = 0;
    double freq_kd = 0.0;
    double freq_single = 0.0;
    std::uint64_t trials = 0;
};

struct DominanceResult {
    DominanceProbe left;  // x = max(1, x_star/2): expect kd <= single
    DominanceProbe right; // x = min(n, 2 x_star): expect kd >= single
};

// Empirical frequencies of {b_x >= s} on both sides of the crossing point,
// for paired trial sets of equal size.
inline DominanceResult dominance_check(const std::vector<LoadVectorView>& kd,
                                       const std::vector<LoadVectorView>& single_choice,
                                       std::uint32_t x_star, std::uint32_t s) {
    if (kd.size() != single_choice.size() || kd.empty()) {
        throw std::invalid_argument("dominance_check: needs equal, non-empty trial sets");
    }
    const std::uint32_t n = kd.front().size();
    if (x_star < 1 || x_star > n) throw std::invalid_argument("dominance_check: bad x_star");

    const std::uint32_t left_x = std::max<std::uint32_t>(1, x_star / 2);
    const std::uint32_t right_x = std::min<std::uint64_t>(n, 2ull * x_star);
    DominanceResult out;
    out.left = {left_x, exceed_frequency(kd, left_x, s), exceed_frequency(single_choice, left_x, s),
                kd.size()};
    out.right = {right_x, exceed_frequency(kd, right_x, s),
                 exceed_frequency(single_choice, right_x, s), kd.size()};
    return out;
}

// Identity of the experiment an aggregate belongs to; merging across
// different configurations is refused.
struct AggregateKey {
    std::uint32_t n = 0;
    std::uint64_t m = 0;
    std::uint32_t k = 0;
    std::uint32_t d = 0;
    Strategy strategy = Strategy::KdChoice;
    TieBreak tie_break = TieBreak::LowestBinIndex;
    std::uint64_t seed = 0;
    bool single_choice = false;
    bool paired_single = false;
    std::vector<std::uint32_t> probes;

    friend bool operator==(const AggregateKey&, const AggregateKey&) = default;
};

// Cross-trial summary built from integer accumulators only, so merging is
// exactly associative and commutative and results do not depend on the order
// trials are folded in.
struct AggregateStats {
    AggregateKey key;
    std::uint64_t trials = 0;
    std::map<std::uint32_t, std::uint64_t> max_load_histogram;
    std::map<std::uint32_t, std::uint64_t> nu_sums; // probe y -> sum over trials of nu_y
    std::map<std::uint32_t, std::uint64_t> mu_sums;
    std::uint64_t messages_total = 0;
    std::uint64_t y_star_emp_sum = 0;
    std::uint64_t y_hat_emp_sum = 0;
    std::uint64_t max_load_sum = 0;
    // populated only for paired runs
    std::map<std::uint32_t, std::uint64_t> intersection_histogram;
    std::map<std::uint32_t, std::uint64_t> single_max_load_histogram;

    bool empty() const { return trials == 0; }

    double mean_messages() const {
        return trials == 0 ? 0.0
                           : static_cast<double>(messages_total) / static_cast<double>(trials);
    }
    double mean_max_load() const {
        return trials == 0 ? 0.0
                           : static_cast<double>(max_load_sum) / static_cast<double>(trials);
    }
    double mean_y_star_emp() const {
        return trials == 0 ? 0.0
                           : static_cast<double>(y_star_emp_sum) / static_cast<double>(trials);
    }
    double mean_y_hat_emp() const {
        return trials == 0 ? 0.0
                           : static_cast<double>(y_hat_emp_sum) / static_cast<double>(trials);
    }
    std::uint32_t observed_max_load() const {
        return max_load_histogram.empty() ? 0 : max_load_histogram.rbegin()->first;
    }
    double mean_nu(std::uint32_t y) const {
        const auto it = nu_sums.find(y);
        return it == nu_sums.end() || trials == 0
                   ? 0.0
                   : static_cast<double>(it->second) / static_cast<double>(trials);
    }
    double mean_mu(std::uint32_t y) const {
        const auto it = mu_sums.find(y);
        return it == mu_sums.end() || trials == 0
                   ? 0.0
                   : static_cast<double>(it->second) / static_cast<double>(trials);
    }

    std::optional<std::uint32_t> median_intersection() const {
        if (intersection_histogram.empty()) return std::nullopt;
        std::uint64_t total = 0;
        for (const auto& [value, count] : intersection_histogram) total += count;
        std::uint64_t seen = 0;
        for (const auto& [value, count] : intersection_histogram) {
            seen += count;
            if (2 * seen >= total) return value;
        }
        return intersection_histogram.rbegin()->first;
    }
};

namespace detail {

inline void merge_histogram(std::map<std::uint32_t, std::uint64_t>& into,
                            const std::map<std::uint32_t, std::uint64_t>& from) {
    for (const auto& [key, count] : from) into[key] += count;
}

} // namespace detail

// Commutative, associative combination; the empty aggregate is the identity.
inline AggregateStats merge(const AggregateStats& a, const AggregateStats& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (!(a.key == b.key)) {
        throw std::invalid_argument("merge: aggregates come from different configurations");
    }
    AggregateStats out = a;
    out.trials += b.trials;
    detail::merge_histogram(out.max_load_histogram, b.max_load_histogram);
    detail::merge_histogram(out.nu_sums, b.nu_sums);
    detail::merge_histogram(out.mu_sums, b.mu_sums);
    out.messages_total += b.messages_total;
    out.y_star_emp_sum += b.y_star_emp_sum;
    out.y_hat_emp_sum += b.y_hat_emp_sum;
    out.max_load_sum += b.max_load_sum;
    detail::merge_histogram(out.intersection_histogram, b.intersection_histogram);
    detail::merge_histogram(out.single_max_load_histogram, b.single_max_load_histogram);
    return out;
}

} // namespace kdchoice
