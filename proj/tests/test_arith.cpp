#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "quadgeo/arith.hpp"

using namespace quadgeo;

TEST_SUITE("arith") {

TEST_CASE("discriminant validation") {
    CHECK(validate_discriminant(2).is_positive);
    CHECK_FALSE(validate_discriminant(-1).is_positive);
    auto reason = [](i64 D) {
        try {
            validate_discriminant(D);
        } catch (const discriminant_error& e) {
            return e.reason;
        }
        FAIL("accepted " << D);
        return disc_reason::zero;
    };
    CHECK(reason(0) == disc_reason::zero);
    CHECK(reason(5) == disc_reason::one_mod_four);
    CHECK(reason(8) == disc_reason::square_factor);
    CHECK(reason(12) == disc_reason::square_factor);
    CHECK(reason(-3) == disc_reason::one_mod_four);
    CHECK_THROWS_AS(validate_discriminant(1), discriminant_error);
}

TEST_CASE("roots_mod_m matches brute force") {
    for (i64 D : {2, 3, 6, 10, -1, -2, -5}) {
        auto d = validate_discriminant(D);
        FactorTable ft(1200);
        for (i64 m = 1; m <= 1200; ++m) {
            std::vector<i64> got;
            for (const Root& r : roots_mod_m(d, m, ft)) got.push_back(r.mu);
            REQUIRE_MESSAGE(got == oracle::brute_roots(D, m), "D=" << D << " m=" << m);
        }
    }
}

TEST_CASE("prime power square roots") {
    auto d = validate_discriminant(2);
    auto r = sqrt_mod_prime_power(d, 7, 3);
    CHECK(r.size() == 2);
    for (i64 x : r) CHECK((x * x - 2) % 343 == 0);
    CHECK(sqrt_mod_prime_power(d, 3, 1).empty());
    // p | D: x^2 = 2 mod 4 has no solution, mod 2 has x = 0
    CHECK(sqrt_mod_prime_power(d, 2, 2).empty());
    CHECK(sqrt_mod_prime_power(d, 2, 1) == std::vector<i64>{0});
}

TEST_CASE("enumeration order and filter") {
    auto d = validate_discriminant(2);
    auto all = enumerate_roots(d, 100);
    CHECK(all.size() == 40);
    CHECK(std::is_sorted(all.begin(), all.end()));
    auto f = make_filter(d, 7, 3);
    auto sub = enumerate_roots(d, 2000, f);
    REQUIRE_FALSE(sub.empty());
    std::size_t expect = 0;
    for (const Root& r : enumerate_roots(d, 2000))
        if (r.m % 7 == 0 && r.mu % 7 == 3) ++expect;
    CHECK(sub.size() == expect);
    CHECK_THROWS_AS(make_filter(d, 7, 2), std::invalid_argument);
}

TEST_CASE("first_n_roots truncates at exactly N") {
    auto d = validate_discriminant(3);
    i64 M = 0;
    auto r = first_n_roots(d, 5000, {}, M);
    CHECK(r.size() == 5000);
    CHECK(r.back().m == M);
    auto full = enumerate_roots(d, M);
    CHECK(std::equal(r.begin(), r.end(), full.begin()));
}

TEST_CASE("csv round trip") {
    auto roots = enumerate_roots(validate_discriminant(10), 300);
    std::stringstream ss;
    write_roots_csv(ss, roots);
    CHECK(ss.str().rfind("m,mu\n", 0) == 0);
    CHECK(read_roots_csv(ss) == roots);
}

}
