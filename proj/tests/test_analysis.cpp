#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sck/analysis.hpp"

using namespace sck::analysis;

TEST_CASE("closed-form error probability") {
    SECTION("vanishes at p_a = 0") {
        CHECK(p_error_closed_form(0.0, 0.5, 10) == 0.0);
    }
    SECTION("matches a direct rational evaluation at (0.4, 0.5, 10)") {
        // r = 2/3; r^10 = 1024/59049; sum_{j=0}^{10} r^j = 3*(1 - (2/3)^11)
        const double r_pow = 1024.0 / 59049.0;
        const double geo_sum = 3.0 * (1.0 - 2048.0 / 177147.0);
        const double expected = r_pow / geo_sum * 0.4 * 0.5;
        CHECK(p_error_closed_form(0.4, 0.5, 10) == Catch::Approx(expected).epsilon(1e-12));
        CHECK(p_error_closed_form(0.4, 0.5, 10) == Catch::Approx(1.16966e-3).epsilon(1e-4));
    }
    SECTION("strictly increasing in p_a, strictly decreasing in M") {
        for (int m : {5, 10, 15, 20, 30}) {
            double prev = -1.0;
            for (int k = 0; k <= 50; ++k) {
                const double pe = p_error_closed_form(0.01 * k, 0.5, m);
                CHECK(pe > prev);
                prev = pe;
            }
        }
        double prev = 1.0;
        for (int m : {5, 10, 15, 20, 30}) {
            const double pe = p_error_closed_form(0.4, 0.5, m);
            CHECK(pe < prev);
            prev = pe;
        }
    }
    SECTION("no blow-up at r = 1") {
        for (int m : {1, 5, 10, 30}) {
            CHECK(p_error_closed_form(0.5, 0.5, m) ==
                  Catch::Approx(0.25 / (m + 1)).epsilon(1e-12));
            CHECK(p_error_closed_form(0.5 - 1e-9, 0.5, m) ==
                  Catch::Approx(0.25 / (m + 1)).epsilon(1e-6));
            CHECK(p_error_limit_at_half(m) == 0.25 / (m + 1));
        }
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(p_error_closed_form(0.1, 0.0, 5), std::domain_error);
        CHECK_THROWS_AS(p_error_closed_form(0.1, 1.0, 5), std::domain_error);
        CHECK_THROWS_AS(p_error_closed_form(0.6, 0.5, 5), std::domain_error);
        CHECK_THROWS_AS(p_error_closed_form(-0.1, 0.5, 5), std::domain_error);
        CHECK_THROWS_AS(p_error_closed_form(0.1, 0.5, 0), std::domain_error);
    }
}

TEST_CASE("maximum error bound") {
    CHECK(p_error_max(10) == 0.025);
    CHECK(p_error_max(5) == 0.05);
    CHECK(p_error_max(30) == Catch::Approx(0.00833333333).epsilon(1e-8));
    CHECK_THROWS_AS(p_error_max(0), std::domain_error);

    // the bound dominates the closed form on a dense grid, and the grid
    // maximum approaches the r->1 limit from below
    for (int m = 2; m <= 30; ++m) {
        double grid_max = 0.0;
        for (int k = 0; k <= 100; ++k)
            grid_max = std::max(grid_max, p_error_closed_form(0.005 * k, 0.5, m));
        CHECK(grid_max <= p_error_max(m));
        CHECK(grid_max > 0.99 * p_error_limit_at_half(m));
    }
}

TEST_CASE("expected error probability by quadrature") {
    SECTION("below the maximum, strictly decreasing in M") {
        double prev = 1.0;
        for (int m : {5, 10, 15, 20, 30}) {
            const double e = expected_p_error(m);
            CHECK(e > 0.0);
            CHECK(e < p_error_max(m));
            CHECK(e < prev);
            prev = e;
        }
    }
    SECTION("quadrature self-consistency") {
        for (int m : {5, 20}) {
            CHECK(std::abs(expected_p_error(m, 20000) - expected_p_error(m, 10000)) < 1e-8);
        }
    }
    CHECK_THROWS_AS(expected_p_error(0), std::domain_error);
    CHECK_THROWS_AS(expected_p_error(10, 50), std::domain_error);
}

TEST_CASE("empirical shrink error agrees with the quadrature") {
    const auto res = empirical_shrink_error(10, 100000, 100, 20240401u);
    const double theory = expected_p_error(10);
    CHECK(std::abs(res.mean_abs_error - theory) / theory < 0.10);
    CHECK(res.standard_error > 0.0);
}

TEST_CASE("empirical shrink error is deterministic") {
    const auto a = empirical_shrink_error(5, 2000, 1, 7u);
    const auto b = empirical_shrink_error(5, 2000, 1, 7u);
    CHECK(a.mean_abs_error == b.mean_abs_error);
    CHECK(a.standard_error == 0.0);
    const auto c = empirical_shrink_error(5, 2000, 1, 8u);
    CHECK(a.mean_abs_error != c.mean_abs_error);  // different seed, different draw
}
