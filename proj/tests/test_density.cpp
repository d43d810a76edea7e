#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "quadgeo/density.hpp"

using namespace quadgeo;

namespace {

// v1(s) = (s^2 + 2qs + 1) / (1 - s^2), v2(s) = (s^2 + 2qs + 1) / (2 (s + q))
double v1(double q, double s) { return (s * s + 2 * q * s + 1) / (1 - s * s); }
double v2(double q, double s) { return (s * s + 2 * q * s + 1) / (2 * (s + q)); }

const ClassGroupData& cg2() {
    static const ClassGroupData cg = narrow_class_reps(validate_discriminant(2));
    return cg;
}

const DensityProfile& profile2() {
    static const DensityProfile p = build_profile(cg2(), 1, 0, 1000);
    return p;
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("h_q, s1, s2") {
    CHECK(h_q(2, 0) == doctest::Approx(std::log(2.0)));
    CHECK(h_q(0.5, 0) == doctest::Approx(std::log(0.5)));
    CHECK(h_q(2, 0.366) == doctest::Approx(1.0050203289525078).epsilon(1e-12));
    CHECK_THROWS_AS(h_q(-2, 0), std::domain_error);
    CHECK(s1(1, 1) == 0);
    CHECK(s2(1, 1) == -1);
    CHECK(s1(2, 3) == doctest::Approx(0.36602540378443865).epsilon(1e-14));
    CHECK(s2(2, 3) == doctest::Approx(-2.4641016151377546).epsilon(1e-14));
    CHECK_THROWS_AS(s1(0.1, 0.1), std::domain_error);
    for (double q : {-3.0, -0.4, 0.7, 2.5})
        for (double v : {-3.5, -0.2, 1.7, 6.0}) {
            if (v * v + q * q - 1 < 0 || v == -1) continue;
            CHECK(v1(q, s1(q, v)) == doctest::Approx(v).epsilon(1e-10));
            CHECK(v2(q, s2(q, v)) == doctest::Approx(v).epsilon(1e-10));
        }
}

TEST_CASE("H_closed case table") {
    CHECK(H_closed(1, -2, 0.7) == 0);
    CHECK(H_closed(1, -2, 30) == 0);
    CHECK(H_closed(1, 0.5, 0.9) == 0);
    CHECK(H_closed(-1, 0.5, 0.5) == 0);
    CHECK(H_closed(1, 2, 3) == doctest::Approx(0.3812418223775096).epsilon(1e-12));
    for (double q = -0.95; q < 1; q += 0.1)
        for (double v = -0.9 * std::sqrt(2 - 2 * q); v < 8; v += 0.37) CHECK(H_closed(-1, q, v) == 0);
    for (double v = -8; v < 8; v += 0.13) CHECK(H_closed(1, -1.5, v) == 0);
}

TEST_CASE("closed form agrees with quadrature on the grid") {
    double worst = 0;
    int points = 0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            double q = -5 + (i + 0.5) * 1.0, v = -4 + (j + 0.5) * 0.8;
            if (std::fabs(std::fabs(q) - 1) < 1e-12 || v == 0) continue;
            for (int s : {1, -1}) {
                worst = std::max(worst, std::fabs(H_closed(s, q, v) - H_quadrature(s, q, v, v).value));
                ++points;
            }
        }
    CHECK(points == 200);
    CHECK(worst <= 1e-8);
}

TEST_CASE("H_quadrature with unequal arguments") {
    CHECK(H_quadrature(1, -2, 1, 1).value == 0);
    // support is monotone in each argument
    CHECK(H_quadrature(1, 2, 3, 4).value >= H_quadrature(1, 2, 3, 3).value);
}

TEST_CASE("q from pairing, cross ratio and frames agree") {
    const auto& cg = cg2();
    auto anchors = make_anchors(cg, 1, 0);
    auto cos = enumerate_double_cosets(cg, 1, 0, 60);
    REQUIRE(cos.size() > 100);
    for (const DoubleCosetRep& c : cos) {
        const Anchor& a1 = anchors[static_cast<std::size_t>(c.l1 - 1)];
        const Anchor& a2 = anchors[static_cast<std::size_t>(c.l2 - 1)];
        CHECK(act(c.gamma, a2.form) == c.form);
        CHECK(canonical_in_orbit(a1, c.form, nullptr, cg) == c.form);
        CrossRatio cr = cross_ratio_q(a1.end_minus, a1.end_plus, theta2(c.form, 2), theta1(c.form, 2));
        CHECK(static_cast<double>(cr.q) == doctest::Approx(static_cast<double>(c.q)).epsilon(1e-12));
        CHECK(cr.sign == c.sign);
        ExactInvariants fi = frame_invariants(a1.frame, c.gamma, a2.frame);
        CHECK(fi.q == QuadInt(2, c.pairing, 0, 8));
        CHECK(fi.sign == c.sign);
        CHECK(std::fabs(static_cast<double>(c.q)) <= 60);
        CHECK(std::fabs(static_cast<double>(c.q)) != 1);
    }
}

TEST_CASE("cross ratio geometry") {
    const i64 D = 2;
    // concentric semicircles of radii 2 and 1 are at distance log 2
    CrossRatio nested = cross_ratio_q(QuadInt(D, -2), QuadInt(D, 2), QuadInt(D, -1), QuadInt(D, 1));
    CHECK(std::fabs(nested.q) > 1);
    CHECK(nested.q == doctest::Approx(std::cosh(std::log(2.0))).epsilon(1e-12));
    CrossRatio swapped = cross_ratio_q(QuadInt(D, -2), QuadInt(D, 2), QuadInt(D, 1), QuadInt(D, -1));
    CHECK(swapped.q == doctest::Approx(-nested.q));
    // circles through 0 and 2 and through 1 and 3 meet at angle pi/3
    CrossRatio meet = cross_ratio_q(QuadInt(D, 0), QuadInt(D, 2), QuadInt(D, 1), QuadInt(D, 3));
    CHECK(std::fabs(meet.q) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS(cross_ratio_q(QuadInt(D, 0), QuadInt(D, 2), QuadInt(D, 0), QuadInt(D, 3)));
}

TEST_CASE("enumeration matches the BFS oracle at Q = 50") {
    const auto& cg = cg2();
    auto cos = enumerate_double_cosets(cg, 1, 0, 50);
    auto anchors = make_anchors(cg, 1, 0);
    std::set<oracle::CosetKey> ours;
    for (const DoubleCosetRep& c : cos)
        ours.emplace(c.l1, c.l2, oracle::orbit_min(c.form, anchors[static_cast<std::size_t>(c.l1 - 1)].M));
    CHECK(ours.size() == cos.size());
    auto small = oracle::bfs_cosets(cg, 50, 3000);
    auto large = oracle::bfs_cosets(cg, 50, 6000);
    CHECK(small == large);
    CHECK(ours == large);
}

TEST_CASE("coset count grows linearly") {
    const auto& cg = narrow_class_reps(validate_discriminant(3));
    std::size_t prev = 0;
    for (double Q : {100.0, 200.0, 400.0}) {
        std::size_t n = enumerate_double_cosets(cg, 1, 0, Q).size();
        if (prev) CHECK(static_cast<double>(n) / static_cast<double>(prev) <= 2.5);
        prev = n;
    }
}

TEST_CASE("kappa and volume") {
    CHECK(static_cast<double>(kappa_gamma(cg2(), 1)) == doctest::Approx(0.5358108904074785).epsilon(1e-14));
    ClassGroupData cg3 = narrow_class_reps(validate_discriminant(3));
    CHECK(static_cast<double>(kappa_gamma(cg3, 1)) == doctest::Approx(0.8006143975412777).epsilon(1e-14));
    CHECK(static_cast<double>(kappa_gamma(cg2(), 2) * 3) == doctest::Approx(0.5358108904074785).epsilon(1e-14));
    CHECK(static_cast<double>(modular_volume(1)) == doctest::Approx(std::numbers::pi / 3));
}

TEST_CASE("w is even, nonnegative and continuous at 0") {
    const DensityProfile& p = profile2();
    for (double v : {0.5, 1.5, 2.5}) CHECK(std::fabs(w_density(p, v).value - w_density(p, -v).value) <= 1e-10);
    for (double v = -6; v <= 6; v += 0.05) CHECK(w_density(p, v).value >= 0);
    const double w0 = w_at_zero(p).value;
    CHECK(w0 > 0);
    CHECK(std::fabs(w_density(p, 1e-3).value - w0) <= 1e-2 * w0);
    CHECK(w_density(p, 0).value == w0);
}

TEST_CASE("truncation error is within the tail bound") {
    DensityProfile lo = build_profile(cg2(), 1, 0, 300);
    DensityProfile hi = build_profile(cg2(), 1, 0, 600);
    for (double v : {0.0, 0.3, 1.0, 2.5, 4.0}) {
        DensityValue a = w_density(lo, v), b = w_density(hi, v);
        CHECK(std::fabs(a.value - b.value) <= a.tail_bound);
    }
}

TEST_CASE("level structure") {
    ClassGroupData cg = cg2();
    auto cos = enumerate_double_cosets(cg, 7, 3, 200);
    for (const DoubleCosetRep& c : cos) CHECK(mod_pos(c.gamma.c, 7) == 0);
    // same stabilizers, so the count scales like 1 / [SL2(Z) : Gamma0(7)]
    const double ratio = static_cast<double>(cos.size()) / static_cast<double>(enumerate_double_cosets(cg, 1, 0, 200).size());
    CHECK(ratio * 8 == doctest::Approx(1).epsilon(0.25));
}

}
