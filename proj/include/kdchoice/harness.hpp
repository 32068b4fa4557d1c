#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kdchoice/bounds.hpp"
#include "kdchoice/process.hpp"
#include "kdchoice/prob.hpp"
#include "kdchoice/stats.hpp"

namespace kdchoice {

struct ExperimentConfig {
    ProcessParams params;
    std::uint64_t trials = 1;
    std::uint32_t parallelism = 1;
    std::vector<std::uint32_t> probes; // y values for the nu/mu curves
    bool paired_single = false;        // also run single-choice with paired streams
    bool single_choice = false;        // battery of plain single-choice runs (k, d unused)
    double slack = 4.0;                // additive slack standing in for the O(1) terms
    // resource cap on total ball placements; a battery that would exceed it
    // is truncated and the report flagged partial
    std::uint64_t max_total_balls = 1ull << 36;

    void validate() const {
        if (trials == 0) throw std::invalid_argument("ExperimentConfig: trials must be positive");
        if (parallelism == 0) {
            throw std::invalid_argument("ExperimentConfig: parallelism must be positive");
        }
        if (params.n == 0 || params.m == 0) {
            throw std::invalid_argument("ExperimentConfig: n and m must be positive");
        }
        if (!single_choice) params.validate();
    }
};

enum class VerdictStatus {
    Pass,
    Fail,
    NotApplicable,
};

inline const char* to_string(VerdictStatus status) {
    switch (status) {
        case VerdictStatus::Pass: return "pass";
        case VerdictStatus::Fail: return "fail";
        case VerdictStatus::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

struct Verdict {
    std::string name;
    double observed = 0.0;
    double predicted = 0.0;
    double slack = 0.0;
    VerdictStatus status = VerdictStatus::NotApplicable;
    std::string note;
};

struct ExperimentReport {
    ExperimentConfig config;
    AggregateStats stats;
    std::optional<BoundReport> bounds;
    std::optional<IntersectionResult> intersection; // analytic anchor for the decomposition
    std::vector<Verdict> verdicts;
    bool partial = false; // battery truncated by the resource cap

    bool all_passed() const {
        for (const Verdict& v : verdicts) {
            if (v.status == VerdictStatus::Fail) return false;
        }
        return true;
    }
};

namespace detail {

inline AggregateKey make_key(const ExperimentConfig& config) {
    AggregateKey key;
    key.n = config.params.n;
    key.m = config.params.m;
    key.k = config.params.k;
    key.d = config.params.d;
    key.strategy = config.params.strategy;
    key.tie_break = config.params.tie_break;
    key.seed = config.params.seed;
    key.single_choice = config.single_choice;
    key.paired_single = config.paired_single;
    key.probes = config.probes;
    return key;
}

inline AggregateStats run_one_trial(const ExperimentConfig& config, std::uint64_t trial,
                                    const std::optional<IntersectionResult>& intersection) {
    const std::uint64_t master = config.params.seed;

    LoadState state = [&] {
        if (config.single_choice) {
            return run_single_choice(config.params.n, config.params.m,
                                     stream_seed(master, trial, StreamLane::Process));
        }
        ProcessParams params = config.params;
        params.seed = stream_seed(master, trial, StreamLane::Process);
        return run_process(params);
    }();

    AggregateStats agg;
    agg.key = make_key(config);
    agg.trials = 1;
    agg.messages_total = state.messages_sent;

    const LoadVectorView view = load_vector(state);
    const std::uint32_t max_load = view.size() == 0 ? 0 : view.at_rank(1);
    agg.max_load_histogram[max_load] = 1;
    agg.max_load_sum = max_load;
    for (const std::uint32_t y : config.probes) {
        agg.nu_sums[y] = nu_y(view, y);
        agg.mu_sums[y] = mu_y(state, y);
    }
    if (intersection) {
        const DecompositionResult dec = decompose(view, intersection->x_star);
        agg.y_star_emp_sum = dec.y_star_emp;
        agg.y_hat_emp_sum = dec.y_hat_emp;
    }
    if (config.paired_single) {
        const LoadState single = run_single_choice(
            config.params.n, config.params.m, stream_seed(master, trial, StreamLane::Single));
        const LoadVectorView single_view = load_vector(single);
        agg.single_max_load_histogram[single_view.at_rank(1)] = 1;
        agg.intersection_histogram[empirical_intersection(view, single_view)] = 1;
    }
    return agg;
}

// Runs fn(t) for t in [0, trials) on up to `parallelism` threads.
template <typename Fn>
inline void parallel_for_trials(std::uint64_t trials, std::uint32_t parallelism, Fn&& fn) {
    const std::uint32_t workers =
        static_cast<std::uint32_t>(std::min<std::uint64_t>(parallelism, trials));
    if (workers <= 1) {
        for (std::uint64_t t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint32_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t t; (t = next.fetch_add(1)) < trials;) fn(t);
        });
    }
    for (std::thread& th : pool) th.join();
}

} // namespace detail

// Battery of seeded trials. Trial t draws its stream from (seed, t), so the
// aggregate is independent of the parallelism level; per-trial results are
// folded in trial order.
inline ExperimentReport run_trials(const ExperimentConfig& config) {
    config.validate();

    ExperimentReport report;
    report.config = config;
    if (!config.single_choice) {
        try {
            report.bounds = max_load_bound(config.params.n, config.params.k, config.params.d);
        } catch (const std::domain_error&) {
            report.bounds.reset();
        }
        report.intersection =
            intersect_x_star(config.params.n, config.params.k, config.params.d);
    }

    std::uint64_t trials = config.trials;
    const std::uint64_t per_trial_balls =
        config.params.m * (config.paired_single ? 2 : 1);
    if (per_trial_balls > 0 && trials > config.max_total_balls / per_trial_balls) {
        trials = std::max<std::uint64_t>(1, config.max_total_balls / per_trial_balls);
        report.partial = true;
    }

    std::vector<AggregateStats> per_trial(trials);
    detail::parallel_for_trials(trials, config.parallelism, [&](std::uint64_t t) {
        per_trial[t] = detail::run_one_trial(config, t, report.intersection);
    });
    AggregateStats total;
    for (const AggregateStats& one : per_trial) total = merge(total, one);
    report.stats = std::move(total);

    // Verdicts are pure functions of (stats, bounds, slack).
    {
        Verdict v;
        v.name = "max_load_leading_bound";
        v.observed = report.stats.observed_max_load();
        v.slack = config.slack;
        if (report.bounds && std::isfinite(report.bounds->leading_bound)) {
            v.predicted = report.bounds->leading_bound;
            v.status = v.observed <= v.predicted + v.slack ? VerdictStatus::Pass
                                                           : VerdictStatus::Fail;
        } else {
            v.status = VerdictStatus::NotApplicable;
            v.note = "leading bound unavailable for these parameters";
        }
        report.verdicts.push_back(v);
    }
    {
        Verdict v;
        v.name = "messages_per_ball";
        const double balls =
            static_cast<double>(config.params.m) * static_cast<double>(report.stats.trials);
        v.observed = static_cast<double>(report.stats.messages_total) / balls;
        if (config.single_choice) {
            v.predicted = 1.0;
            v.status = report.stats.messages_total ==
                               config.params.m * report.stats.trials
                           ? VerdictStatus::Pass
                           : VerdictStatus::Fail;
        } else if (config.params.m % config.params.k == 0) {
            v.predicted =
                static_cast<double>(config.params.d) / static_cast<double>(config.params.k);
            // exact integer identity: messages = trials * (m/k) * d
            const std::uint64_t expected =
                report.stats.trials * (config.params.m / config.params.k) * config.params.d;
            v.status = report.stats.messages_total == expected ? VerdictStatus::Pass
                                                               : VerdictStatus::Fail;
        } else {
            v.predicted =
                static_cast<double>(config.params.d) / static_cast<double>(config.params.k);
            v.status = VerdictStatus::NotApplicable;
            v.note = "m not divisible by k; final round pays d messages for fewer balls";
        }
        report.verdicts.push_back(v);
    }
    {
        Verdict v;
        v.name = "y_hat_mean_vs_upper";
        v.slack = 2.0;
        if (!config.single_choice && report.bounds && std::isfinite(report.bounds->y_hat_upper)) {
            v.observed = report.stats.mean_y_hat_emp();
            v.predicted = report.bounds->y_hat_upper;
            v.status = v.observed <= v.predicted + v.slack ? VerdictStatus::Pass
                                                           : VerdictStatus::Fail;
        } else {
            v.status = VerdictStatus::NotApplicable;
        }
        report.verdicts.push_back(v);
    }
    {
        Verdict v;
        v.name = "y_star_mean_vs_estimate";
        v.slack = 2.0;
        if (!config.single_choice && report.bounds) {
            v.observed = report.stats.mean_y_star_emp();
            v.predicted = static_cast<double>(report.bounds->y_star_est);
            v.status = std::abs(v.observed - v.predicted) <= v.slack ? VerdictStatus::Pass
                                                                     : VerdictStatus::Fail;
        } else {
            v.status = VerdictStatus::NotApplicable;
        }
        report.verdicts.push_back(v);
    }
    return report;
}

struct SweepPoint {
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    std::uint32_t d = 0;
};

struct SweepRow {
    SweepPoint point;
    double d_k = 0.0;
    std::uint64_t trials = 0;
    double max_load_mean = 0.0;
    std::uint32_t max_load_max = 0;
    double messages_per_ball = 0.0;
    double bound_leading = 0.0;
    VerdictStatus verdict = VerdictStatus::NotApplicable;
    std::string error;
};

// One battery per grid point, m = n. Per-point failures are recorded in the
// row and the sweep continues; rows come back in grid order.
inline std::vector<SweepRow> sweep(const std::vector<SweepPoint>& grid, std::uint64_t trials,
                                   std::uint64_t seed, double slack, std::uint32_t parallelism) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const SweepPoint& point : grid) {
        SweepRow row;
        row.point = point;
        row.trials = trials;
        try {
            ExperimentConfig config;
            config.params.n = point.n;
            config.params.m = point.n;
            config.params.k = point.k;
            config.params.d = point.d;
            config.params.seed = seed;
            config.trials = trials;
            config.parallelism = parallelism;
            config.slack = slack;
            const ExperimentReport report = run_trials(config);
            row.d_k = static_cast<double>(point.d) / static_cast<double>(point.d - point.k);
            row.max_load_mean = report.stats.mean_max_load();
            row.max_load_max = report.stats.observed_max_load();
            row.messages_per_ball = static_cast<double>(report.stats.messages_total) /
                                    (static_cast<double>(point.n) * static_cast<double>(trials));
            if (report.bounds) row.bound_leading = report.bounds->leading_bound;
            row.verdict = report.verdicts.front().status; // max-load verdict
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

struct TailCheckResult {
    std::uint64_t trials = 0;
    std::uint64_t mu_violations = 0;
    std::uint64_t nu_violations = 0;
    SingleTailBounds bounds;
    double predicted_prob = 0.0; // union bound over the two tail events
    double margin = 0.0;         // 3-sigma binomial margin on the prediction
    VerdictStatus verdict = VerdictStatus::NotApplicable;
};

// Runs single-choice trials and counts violations of the mu/nu tail
// thresholds. Thresholds below one ball/bin make the bound vacuous and the
// verdict not-applicable.
inline TailCheckResult check_single_tails(std::uint32_t n, std::uint32_t y, std::uint64_t trials,
                                          std::uint64_t seed, std::uint32_t parallelism = 1) {
    if (trials == 0) throw std::invalid_argument("check_single_tails: trials must be positive");
    TailCheckResult result;
    result.trials = trials;
    result.bounds = single_tail_bounds(n, y);

    std::vector<std::uint8_t> mu_flags(trials, 0);
    std::vector<std::uint8_t> nu_flags(trials, 0);
    detail::parallel_for_trials(trials, parallelism, [&](std::uint64_t t) {
        const LoadState state =
            run_single_choice(n, n, stream_seed(seed, t, StreamLane::Process));
        const double mu = static_cast<double>(mu_y(state, y));
        std::uint64_t nu = 0;
        for (const std::uint32_t load : state.loads) nu += load >= y ? 1 : 0;
        if (mu >= result.bounds.mu_threshold) mu_flags[t] = 1;
        if (static_cast<double>(nu) <= result.bounds.nu_threshold) nu_flags[t] = 1;
    });
    std::uint64_t violating_trials = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        result.mu_violations += mu_flags[t];
        result.nu_violations += nu_flags[t];
        if (mu_flags[t] || nu_flags[t]) ++violating_trials;
    }

    if (result.bounds.mu_threshold < 1.0 || result.bounds.nu_threshold < 1.0) {
        result.verdict = VerdictStatus::NotApplicable;
        return result;
    }
    result.predicted_prob = std::min(1.0, result.bounds.mu_prob + result.bounds.nu_prob);
    result.margin = 3.0 * std::sqrt(result.predicted_prob * (1.0 - result.predicted_prob) /
                                    static_cast<double>(trials));
    const double observed =
        static_cast<double>(violating_trials) / static_cast<double>(trials);
    result.verdict = observed <= result.predicted_prob + result.margin ? VerdictStatus::Pass
                                                                       : VerdictStatus::Fail;
    return result;
}

} // namespace kdchoice
