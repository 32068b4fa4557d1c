#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace kdchoice {

namespace detail {

// Kahan compensated accumulator.
class KahanSum {
public:
    void add(double v) {
        const double y = v - compensation_;
        const double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

inline void check_pvector_params(std::uint32_t n, std::uint32_t k, std::uint32_t d) {
    if (n == 0 || k == 0) throw std::invalid_argument("p_x: n and k must be positive");
    if (k >= d) throw std::invalid_argument("p_x: requires k < d");
    if (d > n) throw std::invalid_argument("p_x: requires d <= n");
}

} // namespace detail

// Natural log of C(a, b). Exact integer path (Pascal recurrence) up to a = 60,
// log-gamma beyond.
inline double binom_log(std::uint64_t a, std::uint64_t b) {
    if (b > a) throw std::invalid_argument("binom_log: requires b <= a");
    if (b == 0 || b == a) return 0.0;
    if (a <= 60) {
        // C(60,30) ~ 1.18e17 still fits in 64 bits
        std::uint64_t c = 1;
        const std::uint64_t bb = std::min(b, a - b);
        for (std::uint64_t i = 1; i <= bb; ++i) c = c * (a - bb + i) / i;
        return std::log(static_cast<double>(c));
    }
    return std::lgamma(static_cast<double>(a) + 1.0) - std::lgamma(static_cast<double>(b) + 1.0) -
           std::lgamma(static_cast<double>(a - b) + 1.0);
}

// Probability that the x-th most loaded bin receives at least one ball in a
// round:
//   sum_{j=1..k} C(d, d-k+j) ((x/n)^(d-k+j) - ((x-1)/n)^(d-k+j)) (1 - x/n)^(k-j)
// Each term is evaluated as exp of summed logs; the power difference uses
// a^p - b^p = a^p (1 - ((x-1)/x)^p) to stay stable for x close to n.
inline double p_x_exact(std::uint32_t n, std::uint32_t k, std::uint32_t d, std::uint32_t x) {
    detail::check_pvector_params(n, k, d);
    if (x < 1 || x > n) throw std::invalid_argument("p_x_exact: requires 1 <= x <= n");

    const double log_x_over_n = std::log(static_cast<double>(x)) - std::log(static_cast<double>(n));
    detail::KahanSum acc;
    for (std::uint32_t j = 1; j <= k; ++j) {
        const std::uint32_t p = d - k + j;
        double log_term = binom_log(d, p) + static_cast<double>(p) * log_x_over_n;
        if (x > 1) {
            log_term += std::log(-std::expm1(static_cast<double>(p) * std::log1p(-1.0 / x)));
        }
        if (k > j) {
            if (x == n) continue; // (1 - x/n)^(k-j) == 0
            log_term += static_cast<double>(k - j) *
                        std::log1p(-static_cast<double>(x) / static_cast<double>(n));
        }
        acc.add(std::exp(log_term));
    }
    return acc.value();
}

// Probability that at least one of the x most loaded bins receives a ball in
// a round: sum_{j=0..k-1} C(d, j) (x/n)^(d-j) (1 - x/n)^j.
inline double p_leq_x(std::uint32_t n, std::uint32_t k, std::uint32_t d, std::uint32_t x) {
    detail::check_pvector_params(n, k, d);
    if (x < 1 || x > n) throw std::invalid_argument("p_leq_x: requires 1 <= x <= n");

    const double log_x_over_n = std::log(static_cast<double>(x)) - std::log(static_cast<double>(n));
    detail::KahanSum acc;
    for (std::uint32_t j = 0; j < k; ++j) {
        double log_term = binom_log(d, j) + static_cast<double>(d - j) * log_x_over_n;
        if (j > 0) {
            if (x == n) continue;
            log_term += static_cast<double>(j) *
                        std::log1p(-static_cast<double>(x) / static_cast<double>(n));
        }
        acc.add(std::exp(log_term));
    }
    return acc.value();
}

// Hit probability of any fixed bin in one single-choice round of k balls:
// 1 - (1 - 1/n)^k.
inline double p_single(std::uint32_t n, std::uint32_t k) {
    if (n == 0 || k == 0) throw std::invalid_argument("p_single: n and k must be positive");
    return -std::expm1(static_cast<double>(k) * std::log1p(-1.0 / static_cast<double>(n)));
}

struct ExactProbability {
    std::uint64_t hits = 0;
    std::uint64_t total = 0;
    double value() const { return static_cast<double>(hits) / static_cast<double>(total); }
};

// Brute-force oracle: enumerates all n^d ordered samples and counts those in
// which bin x wins a ball (x appears, and fewer than k slots rank below it).
// Refuses above the n^d <= 1e7 budget. Exact by construction; kept free of
// any shared code with p_x_exact.
inline ExactProbability p_x_oracle(std::uint32_t n, std::uint32_t k, std::uint32_t d,
                                   std::uint32_t x) {
    detail::check_pvector_params(n, k, d);
    if (x < 1 || x > n) throw std::invalid_argument("p_x_oracle: requires 1 <= x <= n");

    constexpr std::uint64_t kBudget = 10'000'000;
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < d; ++i) {
        if (total > kBudget / n) {
            throw std::runtime_error("p_x_oracle: n^d exceeds the enumeration budget");
        }
        total *= n;
    }

    std::vector<std::uint32_t> slots(d, 1);
    std::uint64_t hits = 0;
    for (std::uint64_t it = 0; it < total; ++it) {
        std::uint32_t count_x = 0;
        std::uint32_t count_lighter = 0; // slots ranked strictly less loaded than bin x
        for (const std::uint32_t s : slots) {
            if (s == x) ++count_x;
            if (s > x) ++count_lighter;
        }
        if (count_x > 0 && count_lighter <= k - 1) ++hits;
        // odometer increment
        for (std::uint32_t pos = 0; pos < d; ++pos) {
            if (slots[pos] < n) {
                ++slots[pos];
                break;
            }
            slots[pos] = 1;
        }
    }
    return {hits, total};
}

// Full per-rank hit-probability vector next to its flat single-choice
// counterpart. p[x-1] is the probability that the x-th most loaded bin
// receives at least one ball in a round; p is non-decreasing and sums to at
// most k.
struct ProbabilityVector {
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    std::uint32_t d = 0;
    std::vector<double> p;
    double p_single = 0.0;

    double at_rank(std::uint32_t x) const { return p.at(x - 1); }
};

inline ProbabilityVector probability_vector(std::uint32_t n, std::uint32_t k, std::uint32_t d) {
    detail::check_pvector_params(n, k, d);
    ProbabilityVector out;
    out.n = n;
    out.k = k;
    out.d = d;
    out.p.reserve(n);
    for (std::uint32_t x = 1; x <= n; ++x) out.p.push_back(p_x_exact(n, k, d, x));
    out.p_single = p_single(n, k);
    return out;
}

struct IntersectionResult {
    std::uint32_t x_star = 0;            // largest x with p_x <= p_single
    double lower_bound = 0.0;            // real solution of C(d,d-k) (x/n)^(d-k) = 1/2
    std::optional<double> upper_bound;   // n(d-k)/(k-1) + 1; needs k >= 2
    double d_k = 0.0;
};

// Crossing point between the (k,d)-choice hit-probability vector and the flat
// single-choice one. The scan exploits monotonicity of p in x.
inline IntersectionResult intersect_x_star(std::uint32_t n, std::uint32_t k, std::uint32_t d) {
    detail::check_pvector_params(n, k, d);
    const double p_ref = p_single(n, k);

    IntersectionResult result;
    result.d_k = static_cast<double>(d) / static_cast<double>(d - k);
    result.lower_bound =
        static_cast<double>(n) *
        std::exp((-std::log(2.0) - binom_log(d, d - k)) / static_cast<double>(d - k));
    if (k >= 2) {
        result.upper_bound = static_cast<double>(n) * (d - k) / (k - 1.0) + 1.0;
    }

    if (p_x_exact(n, k, d, 1) > p_ref) {
        result.x_star = 1;
        return result;
    }
    std::uint32_t lo = 1;
    std::uint32_t hi = n;
    while (lo < hi) {
        const std::uint32_t mid = lo + (hi - lo + 1) / 2;
        if (p_x_exact(n, k, d, mid) <= p_ref) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    result.x_star = lo;
    return result;
}

} // namespace kdchoice
