#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nneg/insurance.hpp"
#include "oracles.hpp"

using namespace nneg;

TEST_CASE("attachment point e(n) = np(1+eps)") {
    const ReinsurerBasis basis{0.45, 0.1, 0.0};
    CHECK(xol_excess(100, basis) == doctest::Approx(49.5).epsilon(1e-12));
    CHECK(xol_excess(1, basis) == doctest::Approx(0.495).epsilon(1e-12));
    CHECK_THROWS_AS(xol_excess(10, ReinsurerBasis{0.1, 0.0, 0.0}), ValidationError);  // eps = 0
    CHECK_THROWS_AS(xol_excess(0, basis), ValidationError);
    CHECK_THROWS_AS(xol_excess(10, ReinsurerBasis{0.95, 0.1, 0.0}), ValidationError);  // a >= 1
    CHECK_THROWS_AS(xol_excess(10, ReinsurerBasis{0.4, 0.1, 0.2}), ValidationError);   // eta >= eps
}

TEST_CASE("binomial XoL pricing against enumeration oracle") {
    CHECK(xol_price_binomial(3, 0.0, 0.45) == doctest::Approx(1.35).epsilon(1e-12));  // a GLA
    CHECK(xol_price_binomial(2, 1.0, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
    // frozen boundary value, cross-checked with the lgamma oracle below
    CHECK(xol_price_binomial(100, 49.5, 0.45) == doctest::Approx(0.5019023851).epsilon(1e-8));

    for (int n : {1, 2, 5, 17, 60, 100, 350}) {
        for (double p : {0.03, 0.45, 0.89}) {
            for (double frac : {0.0, 0.31, 0.5, 0.97}) {
                const double e = frac * (n - 0.01);
                CHECK(xol_price_binomial(n, e, p) ==
                      doctest::Approx(oracle::xol_price_direct(n, e, p)).epsilon(1e-10));
            }
        }
    }
    CHECK_THROWS_AS(xol_price_binomial(5, 5.0, 0.3), ValidationError);   // e >= n
    CHECK_THROWS_AS(xol_price_binomial(5, -0.5, 0.3), ValidationError);
    CHECK_THROWS_AS(xol_price_binomial(5, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(xol_price_binomial(5, 1.0, 1.0), ValidationError);
}

TEST_CASE("XoL price monotonicity and the e=0 GLA limit") {
    for (double e = 0.0; e < 8.0; e += 0.5)
        CHECK(xol_price_binomial(8, e, 0.4) >= xol_price_binomial(8, std::min(e + 0.5, 7.99), 0.4));
    CHECK(xol_price_binomial(12, 3.0, 0.3) < xol_price_binomial(12, 3.0, 0.5));
    CHECK(xol_price_binomial(12, 3.0, 0.3) < xol_price_binomial(20, 3.0, 0.3));
    CHECK(xol_price_binomial(9, 0.0, 0.37) == doctest::Approx(9 * 0.37).epsilon(1e-12));
}

TEST_CASE("rate function values and shape") {
    CHECK(rate_function(0.45, 0.45) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rate_function(0.5, 0.75) == doctest::Approx(0.130812035941).epsilon(1e-9));
    CHECK(rate_function(0.45, 0.495) == doctest::Approx(0.004071815283).epsilon(1e-9));
    CHECK_THROWS_AS(rate_function(0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(rate_function(0.5, 1.0), ValidationError);
    // positive away from the mean, convex in a
    for (double a : {0.1, 0.3, 0.6, 0.9}) {
        if (a != 0.45) CHECK(rate_function(0.45, a) > 0.0);
    }
    const double h = 1e-3;
    for (double a = 0.1; a < 0.9; a += 0.1) {
        const double second = rate_function(0.45, a + h) - 2 * rate_function(0.45, a) +
                              rate_function(0.45, a - h);
        CHECK(second > 0.0);
    }
}

TEST_CASE("large-deviations price bound") {
    const ReinsurerBasis basis{0.45, 0.1, 0.0};
    CHECK(ldp_price_bound(100, basis) == doctest::Approx(33.9416917692).epsilon(1e-8));
    // bound dominates the exact price on a sweep
    for (int n = 1; n <= 2000; n = (n < 50 ? n + 1 : n * 2)) {
        const double e = xol_excess(n, basis);
        if (e >= n) continue;
        CHECK(xol_price_binomial(n, e, basis.b()) <= ldp_price_bound(n, basis) + 1e-12);
    }
    CHECK_THROWS_AS(ldp_price_bound(10, ReinsurerBasis{0.4, 0.05, 0.07}), ValidationError);
}

TEST_CASE("quote no-arbitrage screen") {
    CHECK(check_no_arbitrage({10, 5.0, 2.0}, 0.45).pass);
    CHECK(check_no_arbitrage({10, 5.0, 2.0}, 0.45).margin == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_FALSE(check_no_arbitrage({10, 5.0, 2.25}, 0.45).pass);  // equality is not strict

    // every binomial quote with eta < eps passes for n >= 2
    for (int n = 2; n <= 400; n = n * 2 + 1) {
        for (double eta : {0.0, 0.04}) {
            const ReinsurerBasis basis{0.45, 0.1, eta};
            const double e = xol_excess(n, basis);
            const XoLQuote quote{n, e, xol_price_binomial(n, e, basis.b())};
            CHECK(check_no_arbitrage(quote, basis.p).pass);
        }
    }
    CHECK_THROWS_AS((XoLQuote{10, 10.0, 1.0}).validate(), ValidationError);
    CHECK_THROWS_AS((XoLQuote{10, -1.0, 1.0}).validate(), ValidationError);
}

TEST_CASE("asymptotic regime test") {
    const ReinsurerBasis basis{0.45, 0.1, 0.0};
    const double x100 = xol_price_binomial(100, 49.5, 0.45);
    CHECK(asymptotic_regime_test(100, 0.5374, basis, x100));
    CHECK_FALSE(asymptotic_regime_test(1, 0.5374, basis, 0.227));
    CHECK(asymptotic_regime_test(5, 0.5374, basis, 0.0));
    // precondition max(p,q) < 1/(1+eps)
    CHECK_THROWS_AS(asymptotic_regime_test(10, 0.95, basis, 0.1), ValidationError);
}

TEST_CASE("tracking-error identity") {
    const ReinsurerBasis basis{0.45, 0.1, 0.0};
    const double q = 0.5374;
    for (int n : {3, 10, 100, 750}) {
        const double e = xol_excess(n, basis);
        const double x0 = xol_price_binomial(n, e, basis.b());
        const double per_life_cost = (e * q + x0) / n;
        CHECK(per_life_cost - basis.p * q ==
              doctest::Approx(basis.epsilon * basis.p * q + x0 / n).epsilon(1e-12));
    }
}

TEST_CASE("per-life XoL price vanishes faster than any power") {
    const ReinsurerBasis basis{0.45, 0.1, 0.0};
    const double rate = rate_function(basis.b(), basis.a());
    // log price decreases at least linearly with slope near -I_b(a)
    double prev_log = 0.0;
    for (int n = 200; n <= 2000; n += 600) {
        const double px = xol_price_binomial(n, xol_excess(n, basis), basis.b());
        const double lg = std::log(px);
        if (n > 200) CHECK((lg - prev_log) / 600.0 < -0.8 * rate);
        prev_log = lg;
    }
}
