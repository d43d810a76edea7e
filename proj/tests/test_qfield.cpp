#include <map>
#include <set>

#include "doctest.h"
#include "quadgeo/arith.hpp"
#include "quadgeo/qfield.hpp"

using namespace quadgeo;

namespace {

std::vector<i64> valid_positive(i64 hi) {
    std::vector<i64> out;
    for (i64 D = 2; D <= hi; ++D) {
        try {
            validate_discriminant(D);
            out.push_back(D);
        } catch (const discriminant_error&) {
        }
    }
    return out;
}

// h+ by counting SL2(Z) classes of primitive forms of discriminant 4D through reduction
int classes_by_reduction(i64 D) {
    std::set<QForm> reps;
    const i128 disc = 4 * static_cast<i128>(D);
    for (i128 a = -30; a <= 30; ++a)
        for (i128 b = -30; b <= 30; ++b) {
            if (a == 0 || (b * b - disc) % (4 * a) != 0) continue;
            QForm f{a, b, (b * b - disc) / (4 * a)};
            if (gcd128(gcd128(f.a, f.b), f.c) != 1) continue;
            // walk to the reduced cycle and keep its least element
            QForm r = reduce_form(f, D).form, cur = r, least = r;
            do {
                QForm nxt;
                rho_step(cur, D, nxt);
                cur = nxt;
                least = std::min(least, cur);
            } while (cur != r);
            reps.insert(least);
        }
    return static_cast<int>(reps.size());
}

}  // namespace

TEST_SUITE("qfield") {

TEST_CASE("QuadInt exact signs and arithmetic") {
    QuadInt x(2, 3, -2);  // 3 - 2 sqrt 2 > 0
    CHECK(x.sign1() == 1);
    CHECK(x.sign2() == 1);
    CHECK(QuadInt(2, 1, -1).sign1() == -1);
    QuadInt e(2, 3, 2);
    CHECK(e * x == QuadInt(2, 1));
    CHECK((e / x) == e * e);
    CHECK(x.embed1() == doctest::Approx(0.1715728752538099).epsilon(1e-15));
    CHECK(QuadInt(2, 4, 2, 6) == QuadInt(2, 2, 1, 3));
    CHECK(QuadInt(2, 577, -408).sign1() == 1);
    CHECK(QuadInt(2, -577, 408).sign1() == -1);
}

TEST_CASE("Pell units") {
    std::map<i64, std::pair<i128, i128>> expect{{2, {3, 2}}, {3, {2, 1}}, {10, {19, 6}}, {46, {24335, 3588}},
                                                {94, {2143295, 221064}}};
    for (auto [D, xy] : expect) {
        PellUnit u = pell_fundamental(validate_discriminant(D));
        CHECK(u.x == xy.first);
        CHECK(u.y == xy.second);
        CHECK(u.x * u.x - D * u.y * u.y == 1);
    }
}

TEST_CASE("reduction") {
    Reduction r = reduce_form(QForm{1, 0, -2}, 2);
    CHECK(r.form == QForm{1, 2, -1});
    CHECK(act(r.transcript, QForm{1, 0, -2}) == r.form);
    for (i64 D : {2, 3, 7, 46}) {
        for (const QForm& f : reduced_forms(D)) {
            CHECK(is_reduced(f, D));
            CHECK(f.disc() == 4 * D);
            QForm g;
            Mat2 p = rho_step(f, D, g);
            CHECK(is_reduced(g, D));
            CHECK(act(p, f) == g);
        }
    }
}

TEST_CASE("narrow class numbers") {
    std::map<i64, int> expect{{2, 1}, {3, 2}, {6, 2}, {7, 2}, {10, 2}, {11, 2}, {14, 2}, {15, 4}, {26, 2}, {34, 4}};
    for (auto [D, h] : expect) {
        CHECK(narrow_class_reps(validate_discriminant(D)).h_plus == h);
        CHECK(classes_by_reduction(D) == h);
    }
}

TEST_CASE("class data invariants") {
    for (i64 D : valid_positive(50)) {
        ClassGroupData cg = narrow_class_reps(validate_discriminant(D));
        CAPTURE(D);
        std::size_t total = 0;
        for (const GeodesicClass& c : cg.classes) {
            total += c.cycle.size();
            CHECK(c.rep.a > 0);
            CHECK(abs128(c.det_Bl) == 1);
            CHECK(c.M.det() == 1);
            CHECK(c.M.trace() == 2 * cg.eps0.x);
            CHECK(act(c.M, c.anchor_form) == c.anchor_form);
            CHECK(c.det_basis.sign1() > 0);
            for (std::size_t k = 0; k < c.cycle.size(); ++k) CHECK(act(c.cycle_moves[k], c.rep) == c.cycle[k]);
        }
        CHECK(total == cg.reduced_forms.size());
        CHECK(std::is_sorted(cg.classes.begin(), cg.classes.end(),
                             [](const GeodesicClass& x, const GeodesicClass& y) { return x.rep < y.rep; }));
    }
}

TEST_CASE("stabilizer for D=2") {
    ClassGroupData cg = narrow_class_reps(validate_discriminant(2));
    CHECK(cg.classes[0].M == Mat2{3, 4, 2, 3});
    CHECK(cg.ell == doctest::Approx(2 * std::log(3 + 2 * std::sqrt(2.0))));
}

}
