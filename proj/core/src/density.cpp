#include "quadgeo/density.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace quadgeo {

namespace {

// h_q(a) - h_q(b) given a - b; avoids cancellation when a and b are close
double hdiff(double q, double a, double b, double amb) {
    return std::log1p(amb / (b + q)) - std::log1p(-amb * (a + b) / (1 - b * b));
}

double radicand_root(double q, double v) {
    double r = v * v + q * q - 1;
    if (r < 0) throw std::domain_error("negative radicand in s1/s2");
    return std::sqrt(r);
}

}  // namespace

double h_q(double q, double s) {
    double arg = (s + q) / (1 - s * s);
    if (!(arg > 0)) throw std::domain_error("h_q argument is not positive");
    return std::log(arg);
}

double s1(double q, double v) {
    const double R = radicand_root(q, v);
    if (q > 0) return (v - 1) / (q + R);
    if (v == -1) throw std::domain_error("s1 undefined at v = -1");
    return (-q + R) / (v + 1);
}

double s2(double q, double v) {
    const double R = radicand_root(q, v);
    if (q < 0) return v + (1 - v * v) / (R - q);
    return v - q - R;
}

double H_closed(int sign, double q, double v) {
    if (q == 1 || q == -1 || v == 0) return 0;
    if (sign > 0) {
        if (q < -1) return 0;
        if (q < 1) {
            if (!(v > std::sqrt(2 - 2 * q))) return 0;
            const double a = s1(q, v), b = s2(q, v);
            return hdiff(q, a, b, a - b);
        }
        const double R0 = std::sqrt(q * q - 1), Rv = std::sqrt(v * v + q * q - 1);
        const double a = s1(q, v), b = -1 / (q + R0);
        const double amb = (v * (q + R0) + v * v / (Rv + R0)) / ((q + Rv) * (q + R0));
        return hdiff(q, a, b, amb);
    }
    if (q < -1) {
        if (!(std::fabs(v) > std::sqrt(2 - 2 * q))) return 0;
        const double a = s1(q, v), b = s2(q, v);
        return hdiff(q, a, b, a - b);
    }
    if (q < 1) {
        if (!(v < -std::sqrt(2 - 2 * q))) return 0;
        const double a = s1(q, v), b = s2(q, v);
        return hdiff(q, a, b, a - b);
    }
    const double R0 = std::sqrt(q * q - 1), Rv = std::sqrt(v * v + q * q - 1);
    const double a = -q - R0, b = s2(q, v);
    const double amb = -v + v * v / (Rv + R0);
    return hdiff(q, a, b, amb);
}

QuadratureResult H_quadrature(int sign, double q, double v1, double v2, double tol) {
    auto den = [q](double s) { return s * s + 2 * q * s + 1; };
    auto active = [&](double s) {
        const double p = den(s);
        if (p == 0) return false;
        return 2 * v1 * (s + q) / p >= 1 && v2 * (1 - s * s) / p >= 1;
    };
    auto integrand = [&](double s) { return std::fabs(den(s) / ((s + q) * (s * s - 1))); };

    std::vector<double> cuts;
    auto add_roots = [&](double A, double B, double C) {
        if (A == 0) {
            if (B != 0) cuts.push_back(-C / B);
            return;
        }
        double disc = B * B - 4 * A * C;
        if (disc < 0) return;
        double sq = std::sqrt(disc);
        double t = -0.5 * (B + std::copysign(sq, B));
        if (t != 0) {
            cuts.push_back(t / A);
            cuts.push_back(C / t);
        } else {
            cuts.push_back(0);
        }
    };
    add_roots(1, 2 * q - 2 * v1, 1 - 2 * v1 * q);  // 2 v1 (s+q) = s^2 + 2qs + 1
    add_roots(1 + v2, 2 * q, 1 - v2);              // v2 (1 - s^2) = s^2 + 2qs + 1
    add_roots(1, 2 * q, 1);                         // poles of the ratios
    cuts.push_back(-q);

    std::vector<std::pair<double, double>> regions;
    if (sign > 0) {
        regions.emplace_back(-1.0, 1.0);
    } else {
        const double inf = std::numeric_limits<double>::infinity();
        regions.emplace_back(-inf, -1.0);
        regions.emplace_back(1.0, inf);
    }
    QuadratureResult res;
    for (auto [lo, hi] : regions) {
        std::vector<double> pts{lo, hi};
        for (double c : cuts)
            if (c > lo && c < hi) pts.push_back(c);
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            double a = pts[i], b = pts[i + 1];
            if (!(b > a)) continue;
            double mid;
            if (std::isinf(a)) mid = b - 1 - std::fabs(b);
            else if (std::isinf(b)) mid = a + 1 + std::fabs(a);
            else mid = 0.5 * (a + b);
            if (!active(mid)) continue;
            if (std::isinf(a) || std::isinf(b)) throw std::runtime_error("unbounded integration support");
            double err = 0;
            // tanh-sinh copes with the near-singular ends that occur for large v
            boost::math::quadrature::tanh_sinh<double> ts;
            double val = ts.integrate(integrand, a, b, 1e-13, &err);
            res.value += val;
            res.error += err;
        }
    }
    if (res.error > tol) throw std::runtime_error("quadrature tolerance not met");
    return res;
}

namespace {

// x on the arc from a to b traversed in the positive direction of the projective line
bool on_positive_arc(const QuadInt& a, const QuadInt& b, const QuadInt& x) {
    if (compare1(a, b) < 0) return compare1(a, x) < 0 && compare1(x, b) < 0;
    return compare1(x, a) > 0 || compare1(x, b) < 0;
}

}  // namespace

CrossRatio cross_ratio_q(const QuadInt& c1m, const QuadInt& c1p, const QuadInt& g2m, const QuadInt& g2p) {
    const long double a = c1m.embed1(), b = c1p.embed1(), x = g2m.embed1(), y = g2p.embed1();
    if (a == x || a == y || b == x || b == y) throw std::invalid_argument("coincident endpoints");
    const long double r = ((y - a) * (x - b)) / ((y - b) * (x - a));
    CrossRatio out;
    out.q = (r + 1) / (r - 1);
    out.sign = on_positive_arc(c1m, c1p, g2m) ? 1 : -1;
    return out;
}

ExactInvariants frame_invariants(const QMat2& F1, const Mat2& g, const QMat2& F2) {
    const i64 D = F1[0][0].D;
    const QuadInt det1 = F1[0][0] * F1[1][1] - F1[0][1] * F1[1][0];
    const QMat2 inv1{{{F1[1][1] / det1, -F1[0][1] / det1}, {-F1[1][0] / det1, F1[0][0] / det1}}};
    const QuadInt G[2][2] = {{QuadInt(D, g.a), QuadInt(D, g.b)}, {QuadInt(D, g.c), QuadInt(D, g.d)}};
    QuadInt T[2][2], H[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) T[i][j] = inv1[i][0] * G[0][j] + inv1[i][1] * G[1][j];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) H[i][j] = T[i][0] * F2[0][j] + T[i][1] * F2[1][j];
    const QuadInt detH = H[0][0] * H[1][1] - H[0][1] * H[1][0];
    ExactInvariants out;
    out.q = (H[0][0] * H[1][1] + H[0][1] * H[1][0]) / detH;
    out.sign = H[0][1].sign1() * H[1][1].sign1();
    return out;
}

std::vector<Anchor> make_anchors(const ClassGroupData& cg, i64 n, i64 nu) {
    const i64 D = cg.d.D;
    const QuadInt e = cg.eps0.eps(D);
    const QuadInt e2 = e * e;
    std::vector<Anchor> out;
    for (const GeodesicClass& cls : cg.classes) {
        Anchor a;
        a.l = cls.l;
        a.gamma_l = gamma_l_for(n, nu, cls.l, cg);
        a.form = act(a.gamma_l, cls.anchor_form);
        a.M = a.gamma_l * cls.M * a.gamma_l.inv();
        a.end_minus = theta2(a.form, D);
        a.end_plus = theta1(a.form, D);
        const i128 G[2][2] = {{a.gamma_l.a, a.gamma_l.b}, {a.gamma_l.c, a.gamma_l.d}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a.frame[i][j] = cls.basis[0][j] * G[i][0] + cls.basis[1][j] * G[i][1];
        QForm probe = act(mat_S(), a.form);
        if (probe == a.form || probe == a.form.neg()) probe = act(mat_T(), a.form);
        const QuadInt x0 = evaluate(probe, a.end_plus);
        const QuadInt x1 = evaluate(act(a.M, probe), a.end_plus);
        const QuadInt ratio = x1 / x0;
        if (ratio == e2) a.up = a.M;
        else if (ratio == e2.conj()) a.up = a.M.inv();
        else throw std::logic_error("stabilizer does not scale the endpoint value by a unit square");
        out.push_back(a);
    }
    return out;
}

QForm canonical_in_orbit(const Anchor& a, const QForm& f, Mat2* move, const ClassGroupData& cg) {
    const i64 D = cg.d.D;
    const QuadInt e = cg.eps0.eps(D);
    const QuadInt e2 = e * e, e2b = e2.conj();
    const Mat2 down = a.up.inv();
    // |X1| >= |X2| iff a b >= 0 for X = (a + b sqrt D) / den
    auto ratio_ge1 = [](const QuadInt& x) { return sgn(x.a) * sgn(x.b) >= 0; };
    QuadInt X = evaluate(f, a.end_plus);
    if (X.is_zero()) throw std::invalid_argument("form shares an endpoint with the anchor");
    QForm cur = f;
    Mat2 P;
    while (!ratio_ge1(X)) {
        cur = act(a.up, cur);
        X = X * e2;
        P = a.up * P;
    }
    while (ratio_ge1(X * e2b)) {
        cur = act(down, cur);
        X = X * e2b;
        P = down * P;
    }
    if (move) *move = P;
    return cur;
}

namespace {

using cplx = std::complex<long double>;

cplx mobius(const long double g[2][2], cplx z) { return (g[0][0] * z + g[0][1]) / (g[1][0] * z + g[1][1]); }

struct SamplePoint {
    long double x = 0, y = 1;  // in the standard fundamental domain
    Mat2 rho;                  // rho . original point == (x, y)
};

SamplePoint reduce_point(cplx z) {
    SamplePoint p;
    for (int it = 0; it < 10000; ++it) {
        long double k = std::round(z.real());
        if (k != 0) {
            z -= k;
            p.rho = mat_T(-static_cast<i128>(k)) * p.rho;
        }
        if (std::norm(z) < 1 - 1e-15L) {
            z = -1.0L / z;
            p.rho = mat_S() * p.rho;
        } else {
            break;
        }
    }
    p.x = z.real();
    p.y = z.imag();
    return p;
}

std::vector<SamplePoint> segment_samples(const Anchor& a, long double period, int count) {
    long double F[2][2];
    const long double sq = std::sqrt((a.frame[0][0] * a.frame[1][1] - a.frame[0][1] * a.frame[1][0]).embed1());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) F[i][j] = a.frame[i][j].embed1() / sq;
    std::vector<SamplePoint> out;
    for (int k = 0; k < count; ++k) {
        const long double t = (k + 0.5L) * period / count;
        out.push_back(reduce_point(mobius(F, cplx(0, std::exp(t)))));
    }
    return out;
}

// All tau in SL2(Z) (one of +-tau) with || g_P^-1 tau g_P2 ||_F^2 <= T, g_P = n(x) a(y).
template <class Fn>
void ball_elements(const SamplePoint& P, const SamplePoint& P2, long double T, Fn&& fn) {
    const long double x = P.x, y = P.y, xp = P2.x, yp = P2.y;
    const long double syp = std::sqrt(yp);
    const long double G00 = yp + xp * xp / yp, G01 = xp / yp, G11 = 1 / yp;
    const long double tc = T / y;
    const long double slack = 1e-9L;
    const i64 cmax = static_cast<i64>(std::floor(std::sqrt(tc * G11) + slack));
    for (i64 c = 0; c <= cmax; ++c) {
        const long double disc = G11 * tc - static_cast<long double>(c) * c;
        if (disc < -slack) continue;
        const long double sd = std::sqrt(std::max(disc, 0.0L));
        const i64 dlo = static_cast<i64>(std::ceil((-G01 * c - sd) / G11 - slack));
        const i64 dhi = static_cast<i64>(std::floor((-G01 * c + sd) / G11 + slack));
        for (i64 d = dlo; d <= dhi; ++d) {
            if (c == 0 && d != 1) continue;
            i128 a0, nb0;
            if (ext_gcd(d, c, a0, nb0) != 1) continue;
            const i128 b0 = -nb0;
            const long double lc = static_cast<long double>(c), ld = static_cast<long double>(d);
            const long double row2 = y * (G00 * lc * lc + 2 * G01 * lc * ld + G11 * ld * ld);
            const long double rem = y * (T - row2);
            const long double u0 = lc * syp, u1 = lc * xp / syp + ld / syp;
            const long double wa = static_cast<long double>(a0) - x * lc, wb = static_cast<long double>(b0) - x * ld;
            const long double w0 = wa * syp, w1 = wa * xp / syp + wb / syp;
            const long double A = u0 * u0 + u1 * u1, B = w0 * u0 + w1 * u1, C = w0 * w0 + w1 * w1 - rem;
            const long double disc2 = B * B - A * C;
            if (disc2 < -slack) continue;
            const long double s2d = std::sqrt(std::max(disc2, 0.0L));
            const i64 klo = static_cast<i64>(std::ceil((-B - s2d) / A - slack));
            const i64 khi = static_cast<i64>(std::floor((-B + s2d) / A + slack));
            for (i64 k = klo; k <= khi; ++k) fn(Mat2{a0 + static_cast<i128>(k) * c, b0 + static_cast<i128>(k) * d, c, d});
        }
    }
}

bool lex_less(const Mat2& x, const Mat2& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    if (x.c != y.c) return x.c < y.c;
    return x.d < y.d;
}

// gamma <M>: sign with (c, d) lexicographically positive, power of M minimizing the Frobenius norm
Mat2 canonical_right(Mat2 g, const Mat2& M) {
    if (g.c < 0 || (g.c == 0 && g.d < 0)) g = g.neg();
    const Mat2 Minv = M.inv();
    i128 fc = g.frob2();
    for (const Mat2& step : {M, Minv}) {
        while (true) {
            Mat2 nxt = g * step;
            i128 fn = nxt.frob2();
            if (fn >= fc) break;
            g = nxt;
            fc = fn;
        }
    }
    for (const Mat2& step : {M, Minv}) {
        Mat2 nb = g * step;
        if (nb.frob2() == fc && lex_less(nb, g)) g = nb;
    }
    return g;
}

}  // namespace

std::vector<DoubleCosetRep> enumerate_double_cosets(const ClassGroupData& cg, i64 n, i64 nu, double Q,
                                                    EnumerationStats* stats, std::size_t max_cosets) {
    if (!(Q > 1)) throw std::invalid_argument("cutoff must exceed 1");
    const i64 D = cg.d.D;
    const i128 disc = 4 * static_cast<i128>(D);
    const i128 bmax = static_cast<i128>(std::floor(static_cast<long double>(Q) * static_cast<long double>(disc)));
    const std::vector<Anchor> anchors = make_anchors(cg, n, nu);
    const long double period = 2 * cg.log_eps0;
    const int count = std::max(1, static_cast<int>(std::ceil(period)));
    const long double spacing = period / count;
    // a point of the common perpendicular lies within spacing/2 of a sample on each segment
    const long double R = std::acosh(static_cast<long double>(Q)) + spacing + 1e-6L;
    const long double T = 2 * std::cosh(R);

    std::vector<std::vector<SamplePoint>> samples;
    for (const Anchor& a : anchors) samples.push_back(segment_samples(a, period, count));

    std::vector<DoubleCosetRep> out;
    EnumerationStats st;
    for (const Anchor& a1 : anchors) {
        std::unordered_map<QForm, std::size_t, QFormHash> seen;
        for (const Anchor& a2 : anchors) {
            const auto& S1 = samples[static_cast<std::size_t>(a1.l - 1)];
            const auto& S2 = samples[static_cast<std::size_t>(a2.l - 1)];
            for (const SamplePoint& p : S1)
                for (const SamplePoint& p2 : S2) {
                    ++st.balls;
                    const Mat2 rinv = p.rho.inv();
                    ball_elements(p, p2, T, [&](const Mat2& tau) {
                        ++st.candidates;
                        const Mat2 sigma = rinv * tau * p2.rho;
                        if (mod_pos(sigma.c, n) != 0) return;
                        const QForm f = act(sigma, a2.form);
                        const i128 B = pairing(a1.form, f);
                        if (abs128(B) > bmax) return;
                        if (abs128(B) == disc) {
                            if (f != a1.form && f != a1.form.neg())
                                throw std::logic_error("|q| = 1 for a geodesic not equal to the anchor");
                            return;
                        }
                        Mat2 move;
                        const QForm fc = canonical_in_orbit(a1, f, &move, cg);
                        if (seen.count(fc)) return;
                        seen.emplace(fc, out.size());
                        DoubleCosetRep rep;
                        rep.l1 = a1.l;
                        rep.l2 = a2.l;
                        rep.gamma = canonical_right(move * sigma, a2.M);
                        rep.form = fc;
                        rep.pairing = B;
                        rep.q = static_cast<long double>(B) / static_cast<long double>(disc);
                        rep.sign = on_positive_arc(a1.end_minus, a1.end_plus, theta2(fc, D)) ? 1 : -1;
                        out.push_back(rep);
                        if (out.size() > max_cosets) throw budget_error("double coset budget exceeded");
                    });
                }
        }
    }
    std::sort(out.begin(), out.end(), [](const DoubleCosetRep& x, const DoubleCosetRep& y) {
        if (x.l1 != y.l1) return x.l1 < y.l1;
        if (x.l2 != y.l2) return x.l2 < y.l2;
        if (x.pairing != y.pairing) return x.pairing < y.pairing;
        return x.form < y.form;
    });
    if (stats) *stats = st;
    return out;
}

const char* to_string(Normalization n) {
    return n == Normalization::two_pi_volume ? "one_over_2pi_vol" : "one_over_vol";
}

long double modular_volume(i64 n) { return std::numbers::pi_v<long double> / 3 * gamma0_index(n); }

long double kappa_gamma(const ClassGroupData& cg, i64 n) {
    return cg.ell / (2 * std::numbers::pi_v<long double> * modular_volume(n));
}

long double DensityProfile::prefactor() const {
    const long double base = 1 / volume;
    return norm == Normalization::two_pi_volume ? base / (2 * std::numbers::pi_v<long double>) : base;
}

DensityProfile build_profile(const ClassGroupData& cg, i64 n, i64 nu, double Q, Normalization norm) {
    DensityProfile p;
    p.d = cg.d;
    p.n = n;
    p.nu = n == 1 ? 0 : static_cast<i64>(mod_pos(nu, n));
    p.Q = Q;
    p.h_plus = cg.h_plus;
    p.eps0 = cg.eps0;
    p.ell = cg.ell;
    p.volume = modular_volume(n);
    p.kappa = kappa_gamma(cg, n);
    p.norm = norm;
    p.cosets = enumerate_double_cosets(cg, n, nu, Q);
    return p;
}

namespace {

struct Neumaier {
    double sum = 0, comp = 0;
    void add(double x) {
        double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

DensityValue w_at_zero(const DensityProfile& p) {
    Neumaier all, block;
    const double half = p.Q / 2;
    for (const DoubleCosetRep& c : p.cosets) {
        const double q = static_cast<double>(c.q);
        if (!(q > 1)) continue;
        const double R0 = std::sqrt(q * q - 1);
        const double cq = 1 / (2 * R0 * (q + R0));
        all.add(cq);
        if (q > half) block.add(cq);
    }
    const double scale = static_cast<double>(p.prefactor() / (p.kappa * p.kappa));
    return DensityValue{scale * all.value(), 2 * scale * block.value()};
}

DensityValue w_density(const DensityProfile& p, double v) {
    if (v == 0) return w_at_zero(p);
    const double vs = static_cast<double>(v / p.kappa);
    Neumaier all, block;
    const double half = p.Q / 2;
    for (const DoubleCosetRep& c : p.cosets) {
        const double q = static_cast<double>(c.q);
        if (c.sign > 0 && q < -1) continue;
        const double h = H_closed(c.sign, q, vs);
        if (h == 0) continue;
        all.add(h);
        if (std::fabs(q) > half) block.add(h);
    }
    const double scale = static_cast<double>(p.prefactor()) / (v * v);
    return DensityValue{scale * all.value(), 2 * scale * block.value()};
}

DensityValue w_bin_average(const DensityProfile& p, double lo, double hi, int nodes) {
    (void)nodes;
    using rule = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = rule::abscissa();
    const auto& ws = rule::weights();
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    DensityValue acc;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (int s : {-1, 1}) {
            DensityValue w = w_density(p, mid + s * half * xs[i]);
            acc.value += 0.5 * ws[i] * w.value;
            acc.tail_bound += 0.5 * ws[i] * w.tail_bound;
        }
    return acc;
}

}  // namespace quadgeo
