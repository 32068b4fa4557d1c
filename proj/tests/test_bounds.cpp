#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kdchoice/bounds.hpp"

using namespace kdchoice;
using Catch::Approx;

TEST_CASE("leading bound, bounded regime") {
    const BoundReport r = max_load_bound(1u << 20, 1, 2);
    CHECK(r.d_k == Approx(2.0));
    CHECK(r.regime == Regime::BoundedDk);
    CHECK(r.leading_bound == Approx(3.7931617219424645).epsilon(1e-12));
    CHECK(r.bounded_dk_leading == r.leading_bound);

    const BoundReport tradeoff = max_load_bound(1u << 20, 40, 60);
    CHECK(tradeoff.d_k == Approx(3.0));
    CHECK(tradeoff.regime == Regime::BoundedDk);
    CHECK(tradeoff.bounded_dk_leading == Approx(0.8635900725824034).epsilon(1e-12));
    CHECK(tradeoff.y_star_est == 3);
}

TEST_CASE("leading bound, growing regime") {
    const std::uint32_t n = 1u << 20;
    const std::uint32_t d = 1u << 19;
    const BoundReport r = max_load_bound(n, d - 1, d);
    CHECK(r.regime == Regime::GrowingDk);
    CHECK(r.leading_bound == Approx(4.579912515179956).epsilon(1e-10));
    // the d_k term carries the value; the residual term is O(1)
    const double term1 = std::log(r.d_k) / std::log(std::log(r.d_k));
    CHECK(std::abs(r.leading_bound - term1) <= 1.0);
}

TEST_CASE("leading bound domain errors") {
    CHECK_THROWS_AS(max_load_bound(15, 1, 2), std::domain_error);
    CHECK_THROWS_AS(max_load_bound(100, 3, 3), std::invalid_argument);
}

TEST_CASE("leading bound is monotone in n and d") {
    double previous = 0.0;
    for (const std::uint32_t n : {64u, 256u, 4096u, 1u << 16, 1u << 20}) {
        const double value = max_load_bound(n, 1, 2).bounded_dk_leading;
        CHECK(value >= previous);
        previous = value;
    }
    previous = std::numeric_limits<double>::infinity();
    for (const std::uint32_t d : {2u, 3u, 5u, 9u, 17u}) {
        const double value = max_load_bound(1u << 16, 1, d).bounded_dk_leading;
        CHECK(value <= previous);
        previous = value;
    }
    // k = 1 reduces to the classic d-choice shape
    CHECK(max_load_bound(1u << 16, 1, 4).bounded_dk_leading ==
          Approx(std::log(std::log(65536.0)) / std::log(4.0)).epsilon(1e-13));
}

TEST_CASE("y-star factorial estimate") {
    CHECK(y_star_estimate(100, 1, 2) == 2);   // d_k = 2
    CHECK(y_star_estimate(100, 40, 60) == 3); // d_k = 3
    // d_k = 10^6: 9! < 10^6 <= 10!
    CHECK(y_star_estimate(1u << 20, 999999, 1000000) == 10);

    std::mt19937_64 gen(1234);
    for (int it = 0; it < 100; ++it) {
        const std::uint32_t n = 16 + static_cast<std::uint32_t>(gen() % 100000);
        const std::uint32_t d = 2 + static_cast<std::uint32_t>(gen() % std::min(n - 1, 5000u));
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(gen() % (d - 1));
        const double d_k = static_cast<double>(d) / (d - k);
        const int y = y_star_estimate(n, k, d);
        long double fact = 1.0L;
        for (int i = 2; i < y; ++i) fact *= i;
        // (y-1)! < d_k <= y!
        CHECK(static_cast<double>(fact) < d_k + 1e-9);
        CHECK(static_cast<double>(fact) * y >= d_k);
    }
}

TEST_CASE("load-gap window") {
    const YHatBounds classic = y_hat_bounds(1u << 20, 1, 2);
    CHECK(classic.upper == Approx(4.719161140498688).epsilon(1e-12));
    CHECK(classic.lower <= classic.upper);
    CHECK(classic.lower == Approx(1.0)); // capped by the recurrence witness

    const YHatBounds tradeoff = y_hat_bounds(1u << 20, 40, 60);
    CHECK(tradeoff.upper == Approx(1.8364709795214398).epsilon(1e-12));

    // d - k + 1 = n: the denominator dominates
    const YHatBounds extreme = y_hat_bounds(1u << 20, 1, 1u << 20);
    CHECK(extreme.upper > 1.0);
    CHECK(extreme.upper < 1.5);

    CHECK_THROWS_AS(y_hat_bounds(16, 1, 2), std::domain_error); // n/d_k = 8
}

TEST_CASE("gamma recurrence") {
    SECTION("one step by hand") {
        const GammaSequence seq = gamma_sequence(1024, 1, 2);
        REQUIRE(seq.values.size() >= 2);
        CHECK(seq.values[0] == 1024.0);
        CHECK(seq.values[1] == Approx(32.0).epsilon(1e-12));
        CHECK(seq.depth == 0); // 32 < 8 ln 1024 = 55.45
        CHECK(seq.contractive);
    }
    SECTION("classic two-choice depth") {
        const GammaSequence seq = gamma_sequence(1u << 20, 1, 2);
        REQUIRE(seq.values.size() == 3);
        CHECK(seq.values[1] == Approx(32768.0).epsilon(1e-12));
        CHECK(seq.values[2] == Approx(16.0).epsilon(1e-10));
        CHECK(seq.depth == 1);
        // stays within a small additive distance of the analytic gap term
        const double term = std::log(std::log((1u << 20) / 2.0)) / std::log(2.0);
        CHECK(std::abs(term - seq.depth) <= 3.0);
    }
    SECTION("non-contractive start is truncated and flagged") {
        const GammaSequence seq = gamma_sequence(1u << 20, 40, 60);
        CHECK_FALSE(seq.contractive);
        CHECK(seq.depth == 0);
        CHECK(seq.values.size() == 1);
    }
    SECTION("decay and depth consistency for small k") {
        std::mt19937_64 gen(88);
        for (int it = 0; it < 40; ++it) {
            const std::uint32_t n = 256 + static_cast<std::uint32_t>(gen() % (1u << 20));
            const std::uint32_t d = 2 + static_cast<std::uint32_t>(gen() % 6);
            const std::uint32_t k = 1 + static_cast<std::uint32_t>(gen() % (d - 1));
            const GammaSequence seq = gamma_sequence(n, k, d);
            INFO("n=" << n << " k=" << k << " d=" << d);
            for (const double v : seq.values) CHECK(v > 0.0);
            if (!seq.contractive) continue;
            // strictly decreasing once below n/2
            for (std::size_t i = 0; i + 1 < seq.values.size(); ++i) {
                if (seq.values[i] < n / 2.0) CHECK(seq.values[i + 1] < seq.values[i]);
            }
            CHECK(seq.values.back() < 8.0 * std::log(static_cast<double>(n)));
            const double ratio = n / (static_cast<double>(d) / (d - k));
            if (ratio >= 16.0) {
                const double term = std::log(std::log(ratio)) / std::log(d - k + 1.0);
                CHECK(static_cast<double>(seq.depth) <= term + 2.0);
            }
        }
    }
}

TEST_CASE("single-choice tail bounds") {
    SECTION("y = 1 threshold can never trip") {
        const SingleTailBounds b = single_tail_bounds(1000, 1);
        CHECK(b.mu_threshold == Approx(8000.0));
        CHECK(b.nu_threshold == Approx(1000.0 / 6.0));
    }
    SECTION("reference point") {
        const SingleTailBounds b = single_tail_bounds(100000, 4);
        CHECK(b.mu_threshold == Approx(100000.0 / 3.0).epsilon(1e-12));
        CHECK(b.mu_prob <= 1e-300); // e^-5555.6 underflows
        CHECK(b.nu_threshold == Approx(100000.0 / 144.0).epsilon(1e-12));
        CHECK(b.nu_prob == Approx(std::exp(-100000.0 / 576.0)).epsilon(1e-10));
    }
    SECTION("large y makes the bounds vacuous") {
        const SingleTailBounds b = single_tail_bounds(1000, 8);
        CHECK(b.mu_threshold < 1.0);
        CHECK(b.nu_threshold < 1.0);
        CHECK(b.mu_prob > 0.5);
        CHECK(b.nu_prob > 0.5);
    }
}

TEST_CASE("chernoff-style tails") {
    const ChernoffBounds zero = chernoff_bounds(0.0);
    CHECK(zero.upper_tail == 1.0);
    CHECK(zero.lower_tail == 1.0);

    const ChernoffBounds b = chernoff_bounds(24.0);
    CHECK(b.upper_tail == Approx(std::exp(-8.0)).epsilon(1e-14));
    CHECK(b.lower_tail == Approx(std::exp(-3.0)).epsilon(1e-14));

    const double mu = 3.0 * std::log(1e6);
    CHECK(chernoff_bounds(mu).upper_tail == Approx(1e-6).epsilon(1e-10));

    CHECK_THROWS_AS(chernoff_bounds(-1.0), std::invalid_argument);
}
