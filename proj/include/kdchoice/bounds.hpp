#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kdchoice/prob.hpp"

namespace kdchoice {

enum class Regime {
    BoundedDk,
    GrowingDk,
};

// All logarithms in this module are natural. The asymptotic dichotomy in the
// max-load bound cannot be decided from a single (n,k,d), so the report keeps
// both formula values plus the threshold that picked the regime.
struct BoundReport {
    double d_k = 0.0;
    Regime regime = Regime::BoundedDk;
    double leading_bound = 0.0; // the regime-selected value
    double bounded_dk_leading = 0.0;      // ln ln n / ln(d-k+1)
    double growing_dk_leading = 0.0;      // ln d_k/ln ln d_k + ln ln(n/d_k)/ln(d-k+1); NaN when undefined
    int y_star_est = 0;
    double y_hat_upper = 0.0; // NaN when n/d_k < 16
    double y_hat_lower = 0.0;
    int gamma_depth = -1;
    double dk_threshold = 0.0;
};

// Smallest integer y with y! >= d_k (the C=1 instantiation of y! = d_k / C).
inline int y_star_estimate(std::uint32_t n, std::uint32_t k, std::uint32_t d) {
    detail::check_pvector_params(n, k, d);
    const double d_k = static_cast<double>(d) / static_cast<double>(d - k);
    long double factorial = 1.0L;
    int y = 1;
    while (factorial < d_k) {
        ++y;
        factorial *= y;
    }
    return y;
}

struct GammaSequence {
    std::vector<double> values; // gamma_0 = n onwards, including the first value below 8 ln n
    int depth = -1;             // largest i with gamma_i >= 8 ln n
    bool contractive = true;    // false when the recurrence stopped decreasing
};

// gamma_0 = n; gamma_{i+1} = (n_k / 2^{i+5}) C(d, d-k+1) (gamma_i/n)^(d-k+1),
// with n_k = n/k. Evaluated in log space. The recurrence witnesses the load
// gap only while it halves step over step; once a step fails to decrease
// (large C(d, d-k+1) relative to 32k) the witness construction no longer
// applies and the sequence is truncated there.
inline GammaSequence gamma_sequence(std::uint32_t n, std::uint32_t k, std::uint32_t d,
                                    std::size_t max_iter = 64) {
    detail::check_pvector_params(n, k, d);
    const double log_n = std::log(static_cast<double>(n));
    const double log_n_k = log_n - std::log(static_cast<double>(k));
    const double log_choose = binom_log(d, d - k + 1);
    const double log_floor = std::log(8.0 * log_n);
    const double exponent = static_cast<double>(d - k + 1);

    GammaSequence seq;
    double log_gamma = log_n;
    seq.values.push_back(static_cast<double>(n));
    if (log_gamma >= log_floor) seq.depth = 0;
    for (std::size_t i = 0; i + 1 < max_iter && log_gamma >= log_floor; ++i) {
        const double log_next = log_n_k - static_cast<double>(i + 5) * std::numbers::ln2 +
                                log_choose + exponent * (log_gamma - log_n);
        if (log_next >= log_gamma) {
            seq.contractive = false;
            break;
        }
        log_gamma = log_next;
        seq.values.push_back(std::exp(log_gamma));
        if (log_gamma >= log_floor) seq.depth = static_cast<int>(i + 1);
    }
    return seq;
}

struct YHatBounds {
    double upper = 0.0;
    double lower = 0.0;
};

// Load gap above the crossing point: upper = ln ln(n/d_k)/ln(d-k+1) + 1.
// The lower bound caps the same term by the recurrence-witnessed depth from
// gamma_sequence; the shortfall is the gamma-derived slack.
inline YHatBounds y_hat_bounds(std::uint32_t n, std::uint32_t k, std::uint32_t d) {
    detail::check_pvector_params(n, k, d);
    const double d_k = static_cast<double>(d) / static_cast<double>(d - k);
    const double ratio = static_cast<double>(n) / d_k;
    if (ratio < 16.0) throw std::domain_error("y_hat_bounds: requires n/d_k >= 16");
    const double term = std::log(std::log(ratio)) / std::log(static_cast<double>(d - k + 1));
    const int depth = gamma_sequence(n, k, d).depth;
    YHatBounds out;
    out.upper = term + 1.0;
    out.lower = std::min(term, static_cast<double>(depth));
    return out;
}

// Leading terms of the max-load bound. Regime picked by d_k against the
// threshold; n < 16 leaves ln ln n meaningless and is rejected.
inline BoundReport max_load_bound(std::uint32_t n, std::uint32_t k, std::uint32_t d,
                                  double dk_threshold = 16.0) {
    detail::check_pvector_params(n, k, d);
    if (n < 16) throw std::domain_error("max_load_bound: requires n >= 16");

    BoundReport report;
    report.d_k = static_cast<double>(d) / static_cast<double>(d - k);
    report.dk_threshold = dk_threshold;
    report.regime = report.d_k <= dk_threshold ? Regime::BoundedDk : Regime::GrowingDk;

    const double log_dk1 = std::log(static_cast<double>(d - k + 1));
    report.bounded_dk_leading = std::log(std::log(static_cast<double>(n))) / log_dk1;

    const double ratio = static_cast<double>(n) / report.d_k;
    double growing = std::numeric_limits<double>::quiet_NaN();
    if (report.d_k > std::numbers::e) {
        growing = std::log(report.d_k) / std::log(std::log(report.d_k));
        growing += std::log(std::log(ratio)) / log_dk1; // NaN/-inf when n/d_k <= 1, kept as computed
    }
    report.growing_dk_leading = growing;
    report.leading_bound =
        report.regime == Regime::BoundedDk ? report.bounded_dk_leading : report.growing_dk_leading;

    report.y_star_est = y_star_estimate(n, k, d);
    report.gamma_depth = gamma_sequence(n, k, d).depth;
    // the load-gap window needs moderate d_k (d_k <= n/ln^3 n); beyond it
    // the report carries the crossing-load estimate alone
    const double log_n = std::log(static_cast<double>(n));
    if (ratio >= 16.0 && ratio >= log_n * log_n * log_n) {
        const YHatBounds yh = y_hat_bounds(n, k, d);
        report.y_hat_upper = yh.upper;
        report.y_hat_lower = yh.lower;
    } else {
        report.y_hat_upper = std::numeric_limits<double>::quiet_NaN();
        report.y_hat_lower = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

struct SingleTailBounds {
    double mu_threshold = 0.0; // 8n / y!
    double mu_prob = 0.0;      // e^(-4n / (3 y!))
    double nu_threshold = 0.0; // n / (6 y!)
    double nu_prob = 0.0;      // e^(-n / (24 y!))
};

// Tail bounds for the single-choice process: balls of height >= y and bins
// with >= y balls.
inline SingleTailBounds single_tail_bounds(std::uint64_t n, std::uint32_t y) {
    if (n == 0 || y == 0) throw std::invalid_argument("single_tail_bounds: n, y must be positive");
    const double log_fact = std::lgamma(static_cast<double>(y) + 1.0);
    const double log_n = std::log(static_cast<double>(n));
    SingleTailBounds out;
    out.mu_threshold = std::exp(log_n + std::log(8.0) - log_fact);
    out.mu_prob = std::exp(-std::exp(log_n + std::log(4.0 / 3.0) - log_fact));
    out.nu_threshold = std::exp(log_n - std::log(6.0) - log_fact);
    out.nu_prob = std::exp(-std::exp(log_n - std::log(24.0) - log_fact));
    return out;
}

struct ChernoffBounds {
    double upper_tail = 0.0; // Pr(X >= 2 mu)   <= e^(-mu/3)
    double lower_tail = 0.0; // Pr(X <= mu / 2) <= e^(-mu/8)
};

// Chernoff-style tails for sums of negatively associated indicators.
inline ChernoffBounds chernoff_bounds(double mu) {
    if (mu < 0.0) throw std::invalid_argument("chernoff_bounds: mu must be non-negative");
    return {std::exp(-mu / 3.0), std::exp(-mu / 8.0)};
}

} // namespace kdchoice
