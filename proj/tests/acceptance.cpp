// One PASS/FAIL line per primary acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "oracles.hpp"
#include "quadgeo/correspondence.hpp"
#include "quadgeo/density.hpp"
#include "quadgeo/stats.hpp"

using namespace quadgeo;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(const char* name, double budget_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.pass && s <= budget_s;
    if (!ok) ++failures;
    std::printf("%s %-28s %s [%.2fs / %.0fs]\n", ok ? "PASS" : "FAIL", name, o.detail.c_str(), s, budget_s);
    std::fflush(stdout);
}

std::string f(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string f(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

std::vector<i64> valid_positive_upto(i64 hi) {
    std::vector<i64> out;
    for (i64 D = 2; D <= hi; ++D) try {
            validate_discriminant(D);
            out.push_back(D);
        } catch (const discriminant_error&) {
        }
    return out;
}

}  // namespace

int main() {
    run("root-enumeration-oracle", 10, [] {
        std::size_t mismatches = 0, checked = 0;
        FactorTable ft(5000);
        for (i64 D : {2, 3, 10, -1, -5}) {
            auto d = validate_discriminant(D);
            for (i64 m = 1; m <= 5000; ++m) {
                std::vector<i64> got;
                for (const Root& r : roots_mod_m(d, m, ft)) got.push_back(r.mu);
                if (got != oracle::brute_roots(D, m)) ++mismatches;
                ++checked;
            }
        }
        return Outcome{mismatches == 0, f("moduli=%zu mismatches=%zu", checked, mismatches)};
    });

    run("intensity", 60, [] {
        auto d = validate_discriminant(2);
        ClassGroupData cg = narrow_class_reps(d);
        const i64 M = 1000000;
        std::size_t count = 0;
        FactorTable ft(M);
        enumerate_roots(d, 1, M, {}, ft, [&](const Root&) { ++count; });
        const double kappa = static_cast<double>(kappa_gamma(cg, 1));
        const double ratio = static_cast<double>(count) * std::sqrt(2.0) / (kappa * static_cast<double>(M));
        return Outcome{ratio >= 0.98 && ratio <= 1.02, f("roots=%zu kappa=%.6f ratio=%.6f", count, kappa, ratio)};
    });

    run("closed-form-vs-quadrature", 30, [] {
        double worst = 0;
        int points = 0;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                double q = -5 + (i + 0.5), v = -4 + (j + 0.5) * 0.8;
                for (int s : {1, -1}) {
                    worst = std::max(worst, std::fabs(H_closed(s, q, v) - H_quadrature(s, q, v, v).value));
                    ++points;
                }
            }
        return Outcome{points == 200 && worst <= 1e-8, f("points=%d max_diff=%.3g", points, worst)};
    });

    run("figure-reproduction", 600, [] {
        std::string detail;
        bool all = true;
        for (i64 D : {2, 3, 10}) {
            auto d = validate_discriminant(D);
            const i64 N = 1000000;
            i64 M = 0;
            PointSequence s = normalize(first_n_roots(d, N, {}, M), D, M);
            Histogram h = pair_correlation(s, {-4, 4, 0.1});
            ClassGroupData cg = narrow_class_reps(d);
            DensityProfile p = build_profile(cg, 1, 0, 1000);
            double worst = 0, mean = 0, tail = 0;
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                DensityValue w = w_bin_average(p, h.bin_lo(b), h.bin_hi(b));
                double e = h.density(b, static_cast<double>(N));
                worst = std::max(worst, std::fabs(e - w.value));
                mean += std::fabs(e - w.value);
                tail = std::max(tail, w.tail_bound);
            }
            mean /= static_cast<double>(h.counts.size());
            all = all && worst <= 0.05 && mean <= 0.02 && tail <= 0.005;
            detail += f("D=%lld max=%.4f mean=%.4f tail=%.4f; ", static_cast<long long>(D), worst, mean, tail);
        }
        return Outcome{all, detail};
    });

    run("correspondence-bijection", 60, [] {
        std::size_t failures_rt = 0, checked = 0, dup = 0, orbit = 0;
        for (i64 D : {2, 3, 10}) {
            auto d = validate_discriminant(D);
            ClassGroupData cg = narrow_class_reps(d);
            std::set<std::tuple<int, i128, i128, i128, i128>> seen;
            for (const Root& r : enumerate_roots(d, 10000)) {
                CosetAddress a = root_to_address(r, cg);
                auto back = address_to_root(a.l, a.gamma, cg);
                if (!back || *back != r || !parametrization_holds(a, r, cg)) ++failures_rt;
                if (!seen.emplace(a.l, a.gamma.a, a.gamma.b, a.gamma.c, a.gamma.d).second) ++dup;
                ++checked;
            }
        }
        // filtered family m = 0, mu = 3 mod 7 for D = 2: addresses fall in Gamma0(7) gamma_l Gamma_l
        auto d = validate_discriminant(2);
        ClassGroupData cg = narrow_class_reps(d);
        const Mat2 gl = gamma_l_for(7, 3, 1, cg);
        const Mat2& Ml = cg.classes[0].M;
        std::size_t filtered = 0;
        std::set<std::tuple<int, i128, i128, i128, i128>> seen;
        for (const Root& r : enumerate_roots(d, 10000, make_filter(d, 7, 3))) {
            CosetAddress a = root_to_address(r, cg);
            auto back = address_to_root(a.l, a.gamma, cg);
            if (!back || *back != r) ++failures_rt;
            if (!seen.emplace(a.l, a.gamma.a, a.gamma.b, a.gamma.c, a.gamma.d).second) ++dup;
            bool in = false;
            for (int k = 0; k < 64 && !in; ++k) in = same_gamma0_coset(a.gamma * mat_pow(Ml, k), gl, 7);
            if (!in) ++orbit;
            ++filtered;
        }
        return Outcome{failures_rt == 0 && dup == 0 && orbit == 0,
                       f("roots=%zu filtered=%zu roundtrip_failures=%zu duplicate_addresses=%zu outside_orbit=%zu",
                         checked, filtered, failures_rt, dup, orbit)};
    });

    run("basis-unimodular", 60, [] {
        std::size_t classes = 0, bad = 0, discs = 0;
        for (i64 D : valid_positive_upto(50)) {
            ClassGroupData cg = narrow_class_reps(validate_discriminant(D));
            for (const GeodesicClass& c : cg.classes) {
                ++classes;
                if (abs128(c.det_Bl) != 1) ++bad;
            }
            ++discs;
        }
        return Outcome{bad == 0, f("discriminants=%zu classes=%zu det_not_pm1=%zu", discs, classes, bad)};
    });

    run("stabilizer-lift", 60, [] {
        std::size_t checked = 0, bad = 0;
        for (i64 D : {2, 3, 10}) {
            auto d = validate_discriminant(D);
            ClassGroupData cg = narrow_class_reps(d);
            for (i64 n : {2, 3, 7})
                for (i64 nu = 0; nu < n; ++nu) {
                    if (mod_pos(static_cast<i128>(nu) * nu - D, n) != 0) continue;
                    for (const GeodesicClass& c : cg.classes) {
                        ++checked;
                        if (!verify_lift(c.l, n, gamma_l_for(n, nu, c.l, cg), cg)) ++bad;
                    }
                }
        }
        return Outcome{bad == 0 && checked > 0, f("lifts=%zu failed=%zu", checked, bad)};
    });

    run("double-coset-scaling", 120, [] {
        ClassGroupData cg = narrow_class_reps(validate_discriminant(2));
        std::size_t c250 = enumerate_double_cosets(cg, 1, 0, 250).size();
        std::size_t c500 = enumerate_double_cosets(cg, 1, 0, 500).size();
        std::size_t c1000 = enumerate_double_cosets(cg, 1, 0, 1000).size();
        double r1 = static_cast<double>(c500) / static_cast<double>(c250);
        double r2 = static_cast<double>(c1000) / static_cast<double>(c500);
        auto anchors = make_anchors(cg, 1, 0);
        std::set<oracle::CosetKey> ours;
        auto cos = enumerate_double_cosets(cg, 1, 0, 50);
        for (const DoubleCosetRep& c : cos)
            ours.emplace(c.l1, c.l2, oracle::orbit_min(c.form, anchors[static_cast<std::size_t>(c.l1 - 1)].M));
        auto bfs = oracle::bfs_cosets(cg, 50, 6000);
        bool same = ours == bfs && ours.size() == cos.size();
        return Outcome{r1 <= 2.5 && r2 <= 2.5 && same,
                       f("counts=%zu/%zu/%zu ratios=%.3f/%.3f Q50 enumeration=%zu bfs=%zu equal=%s", c250, c500, c1000,
                         r1, r2, cos.size(), bfs.size(), same ? "yes" : "no")};
    });

    run("near-zero-density", 60, [] {
        ClassGroupData cg = narrow_class_reps(validate_discriminant(2));
        DensityProfile p = build_profile(cg, 1, 0, 1000);
        double w0 = w_at_zero(p).value, w1 = w_density(p, 1e-3).value;
        return Outcome{w0 > 0 && std::fabs(w1 - w0) <= 1e-2 * w0, f("w(0)=%.6f w(1e-3)=%.6f", w0, w1)};
    });

    run("log-bound", 60, [] {
        LogBoundResult r = log_bound_check(validate_discriminant(2), {1e-2, 1e-3, 1e-4, 1e-5});
        double lo = 1e300, hi = 0;
        std::string detail;
        for (const LogBoundRow& row : r.rows) {
            lo = std::min(lo, row.ratio);
            hi = std::max(hi, row.ratio);
            detail += f("y=%g max=%zu ratio=%.3f; ", row.y, row.max_count, row.ratio);
        }
        // a single constant: the ratio neither grows nor spreads beyond a factor 2 across four decades
        return Outcome{hi <= 2 * lo && r.rows.back().ratio <= 2 * r.rows.front().ratio, detail + f("slope=%.3f", r.slope)};
    });

    run("gap-and-pair-normalization", 60, [] {
        auto d = validate_discriminant(2);
        i64 M = 0;
        const i64 N = 1000000;
        PointSequence s = normalize(first_n_roots(d, N, {}, M), 2, M);
        GapResult g = gap_distribution(s);
        double err = std::fabs(g.scaled_sum - static_cast<double>(N));
        std::size_t mismatched = 0;
        for (i64 n : {20, 500, 2000}) {
            PointSequence t = normalize(first_n_roots(d, n, {}, M), 2, M);
            HistogramSpec spec{-5, 5, 0.05};
            if (pair_correlation(t, spec).counts != oracle::brute_pair_correlation(t, spec).counts) ++mismatched;
        }
        return Outcome{err <= 1e-9 && mismatched == 0,
                       f("|sum-N|=%.3g pair_mismatches=%zu", err, mismatched)};
    });

    std::printf("%s %d failed\n", failures ? "FAIL" : "PASS", failures);
    return failures;
}
