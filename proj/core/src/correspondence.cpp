#include "quadgeo/correspondence.hpp"

#include <cmath>
#include <stdexcept>

namespace quadgeo {

namespace {

const GeodesicClass& class_at(const ClassGroupData& cg, int l) {
    if (l < 1 || l > cg.h_plus) throw std::out_of_range("class index out of range");
    return cg.classes[static_cast<std::size_t>(l - 1)];
}

bool lex_less(const Mat2& x, const Mat2& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    if (x.c != y.c) return x.c < y.c;
    return x.d < y.d;
}

// c beta_1 + d beta_2 = c (mu_l + sqrt D) + d m_l
QuadInt bottom_row_value(const Mat2& g, const GeodesicClass& cls, i64 D) {
    return QuadInt(D, add_chk(mul_chk(g.c, cls.anchor.mu), mul_chk(g.d, cls.anchor.m)), g.c);
}

i128 row2_norm(const Mat2& g) { return add_chk(mul_chk(g.c, g.c), mul_chk(g.d, g.d)); }

// argmin over j of cost(g M^j), cost convex in j; ties resolved lexicographically
template <class Cost>
Mat2 minimize_power(const Mat2& g, const Mat2& M, Cost cost) {
    const Mat2 Minv = M.inv();
    Mat2 cur = g;
    i128 fc = cost(cur);
    for (const Mat2& step : {M, Minv}) {
        while (true) {
            Mat2 nxt = cur * step;
            i128 fn = cost(nxt);
            if (fn >= fc) break;
            cur = nxt;
            fc = fn;
        }
    }
    for (const Mat2& step : {M, Minv}) {
        Mat2 nb = cur * step;
        if (cost(nb) == fc && lex_less(nb, cur)) cur = nb;
    }
    return cur;
}

}  // namespace

QMat2 hnf_frame(const Root& r, i64 D) {
    QuadInt b1(D, r.mu, 1), b2(D, r.m);
    return QMat2{{{b1, b1.conj()}, {b2, b2.conj()}}};
}

std::pair<i128, i128> explicit_root(int l, const Mat2& g, const ClassGroupData& cg) {
    const GeodesicClass& cls = class_at(cg, l);
    const Mat2& B1 = cls.Bli[0];
    const Mat2& B2 = cls.Bli[1];
    // b_ijk with B1 = [[b111, b112], [b121, b122]], B2 = [[b211, b212], [b221, b222]]
    const i128 b111 = B1.a, b112 = B1.b, b121 = B1.c, b122 = B1.d;
    const i128 b211 = B2.a, b212 = B2.b, b221 = B2.c, b222 = B2.d;
    const Mat2 K{sub_chk(mul_chk(b112, b211), mul_chk(b212, b111)), sub_chk(mul_chk(b112, b221), mul_chk(b212, b121)),
                 sub_chk(mul_chk(b122, b211), mul_chk(b111, b222)), sub_chk(mul_chk(b122, b221), mul_chk(b121, b222))};
    const i128 u = add_chk(mul_chk(K.a, g.c), mul_chk(K.b, g.d));
    const i128 v = add_chk(mul_chk(K.c, g.c), mul_chk(K.d, g.d));
    i128 mu = add_chk(mul_chk(g.a, u), mul_chk(g.b, v));
    i128 m = add_chk(mul_chk(g.c, u), mul_chk(g.d, v));
    return {mul_chk(cls.det_Bl, mu), mul_chk(cls.det_Bl, m)};
}

std::optional<Root> address_to_root(int l, const Mat2& g, const ClassGroupData& cg) {
    if (g.det() != 1) throw std::invalid_argument("gamma must have determinant one");
    auto [mu, m] = explicit_root(l, g, cg);
    if (m <= 0) return std::nullopt;
    return Root{narrow64(m), narrow64(mod_pos(mu, m))};
}

Mat2 canonical_double_coset(int l, const Mat2& gamma, const ClassGroupData& cg) {
    const GeodesicClass& cls = class_at(cg, l);
    const i64 D = cg.d.D;
    Mat2 g = gamma;
    auto [mu, m] = explicit_root(l, g, cg);
    if (m > 0) {
        if (bottom_row_value(g, cls, D).sign1() < 0) g = g.neg();
        g = mat_T(-floor_div(mu, m)) * g;
        return minimize_power(g, cls.M, [](const Mat2& x) { return x.frob2(); });
    }
    const Mat2 Minv = cls.M.inv();
    Mat2 cur = g;
    i128 fc = row2_norm(cur);
    for (const Mat2& step : {cls.M, Minv}) {
        while (true) {
            Mat2 nxt = cur * step;
            i128 fn = row2_norm(nxt);
            if (fn >= fc) break;
            cur = nxt;
            fc = fn;
        }
    }
    auto finish = [](Mat2 x) {
        if (x.c < 0 || (x.c == 0 && x.d < 0)) x = x.neg();
        const i128 n2 = row2_norm(x);
        const i128 dot = add_chk(mul_chk(x.a, x.c), mul_chk(x.b, x.d));
        // k = floor(-dot / n2 + 1/2)
        const i128 k = floor_div(sub_chk(n2, mul_chk(2, dot)), mul_chk(2, n2));
        return mat_T(k) * x;
    };
    Mat2 best = finish(cur);
    for (const Mat2& step : {cls.M, Minv}) {
        Mat2 nb = cur * step;
        if (row2_norm(nb) == fc) {
            Mat2 cand = finish(nb);
            if (lex_less(cand, best)) best = cand;
        }
    }
    return best;
}

bool parametrization_holds(const CosetAddress& a, const Root& r, const ClassGroupData& cg) {
    const GeodesicClass& cls = class_at(cg, a.l);
    const i64 D = cg.d.D;
    const QMat2 target = hnf_frame(r, D);
    const QuadInt xs[2] = {a.xi, a.xi.conj()};
    const i128 G[2][2] = {{a.gamma.a, a.gamma.b}, {a.gamma.c, a.gamma.d}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            QuadInt v = (cls.basis[0][j] * G[i][0] + cls.basis[1][j] * G[i][1]) * xs[j];
            if (!(v == target[i][j])) return false;
        }
    return a.xi.totally_positive();
}

CosetAddress root_to_address(const Root& r, const ClassGroupData& cg) {
    const i64 D = cg.d.D;
    const QForm F = root_form(r, D);
    const Reduction red = reduce_form(F, D);
    int cls_idx = 0, pos = 0;
    if (!cg.locate(red.form, cls_idx, pos)) throw std::logic_error("reduced form matches no class");
    const GeodesicClass& cls = cg.classes[static_cast<std::size_t>(cls_idx)];
    Mat2 g = red.transcript.inv() * cls.cycle_moves[static_cast<std::size_t>(pos)] * cls.anchor_to_rep;
    if (act(g, cls.anchor_form) != F) throw std::logic_error("transcript composition does not reach the root form");
    CosetAddress a;
    a.l = cls.l;
    a.gamma = canonical_double_coset(a.l, g, cg);
    a.xi = QuadInt(D, r.m) / bottom_row_value(a.gamma, cls, D);
    if (!a.xi.totally_positive()) throw std::logic_error("xi is not totally positive");
    return a;
}

GeodesicTop top_of_root(const Root& r, i64 D) {
    if (D <= 0) throw std::invalid_argument("tops need D > 0");
    return GeodesicTop{r, D};
}

GeodesicPosition geodesic_position(const Root& r, const ClassGroupData& cg) {
    return geodesic_position(r, root_to_address(r, cg), cg);
}

GeodesicPosition geodesic_position(const Root& r, const CosetAddress& a, const ClassGroupData& cg) {
    (void)r;
    const i64 D = cg.d.D;
    const long double period = 2 * cg.log_eps0;
    GeodesicPosition p{a.l, 0};
    const long double approx = std::log(a.xi.embed1()) - std::log(a.xi.embed2());
    try {
        const QuadInt one(D, 1);
        const QuadInt e = cg.eps0.eps(D);
        const QuadInt e2 = e * e, e2bar = e2.conj();
        QuadInt rho = a.xi / a.xi.conj();
        long double jf = std::floor(approx / period);
        long long j = static_cast<long long>(jf);
        for (long long i = 0; i < (j < 0 ? -j : j); ++i) rho = rho * (j > 0 ? e2bar : e2);
        for (int guard = 0; compare1(rho, one) < 0 && guard < 4; ++guard) rho = rho * e2;
        for (int guard = 0; compare1(rho, e2) >= 0 && guard < 4; ++guard) rho = rho * e2bar;
        if (compare1(rho, one) < 0 || compare1(rho, e2) >= 0) throw std::logic_error("position reduction failed");
        p.t = std::log(rho.embed1());
    } catch (const overflow_error&) {
        p.t = approx - period * std::floor(approx / period);
    }
    if (p.t < 0) p.t = 0;
    if (p.t >= period) p.t = std::nextafter(period, 0.0L);
    return p;
}

long double position_residual(const Root& r, const CosetAddress& a, long double t, const ClassGroupData& cg) {
    const GeodesicClass& cls = class_at(cg, a.l);
    const long double sq = std::sqrt(cls.det_basis.embed1());
    long double g[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g[i][j] = cls.basis[i][j].embed1() / sq;
    // g_l^-1 (det 1)
    const long double gi[2][2] = {{g[1][1], -g[0][1]}, {-g[1][0], g[0][0]}};
    const Mat2 ginv_gamma = a.gamma.inv();
    const long double G[2][2] = {{static_cast<long double>(ginv_gamma.a), static_cast<long double>(ginv_gamma.b)},
                                 {static_cast<long double>(ginv_gamma.c), static_cast<long double>(ginv_gamma.d)}};
    const GeodesicTop top = top_of_root(r, cg.d.D);
    const long double x = top.x(), y = top.y(), sy = std::sqrt(y);
    const long double c4 = std::sqrt(0.5L);
    // n(x) a(y) k(pi/2) with k(theta) = [[cos theta/2, -sin theta/2], [sin theta/2, cos theta/2]]
    const long double na[2][2] = {{sy, x / sy}, {0, 1 / sy}};
    const long double k[2][2] = {{c4, -c4}, {c4, c4}};
    auto mul = [](const long double A[2][2], const long double B[2][2], long double C[2][2]) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) C[i][j] = A[i][0] * B[0][j] + A[i][1] * B[1][j];
    };
    long double t1[2][2], t2[2][2], X[2][2];
    mul(gi, G, t1);
    mul(t1, na, t2);
    mul(t2, k, X);
    const long double s = X[0][0] * X[0][0];
    const long double period = 2 * cg.log_eps0;
    long double dt = std::log(s) - t;
    dt -= period * std::round(dt / period);
    long double res = std::fabs(dt);
    res = std::max(res, std::fabs(X[0][1]));
    res = std::max(res, std::fabs(X[1][0]));
    res = std::max(res, std::fabs(X[0][0] * X[1][1] - 1));
    return res;
}

Mat2 gamma_l_for(i64 n, i64 nu, int l, const ClassGroupData& cg, i64 search_bound) {
    class_at(cg, l);
    if (n == 1) return Mat2{};
    const CongruenceFilter filter = make_filter(cg.d, n, nu);
    FactorTable ft(search_bound);
    for (i64 m = n; m <= search_bound; m += n)
        for (const Root& r : roots_mod_m(cg.d, m, ft)) {
            if (!filter.accepts(r)) continue;
            CosetAddress a = root_to_address(r, cg);
            if (a.l == l) return a.gamma;
        }
    throw std::runtime_error("no filtered root of the requested class below the search bound");
}

bool verify_lift(int l, i64 n, const Mat2& gamma_l, const ClassGroupData& cg) {
    const GeodesicClass& cls = class_at(cg, l);
    if (gamma_l.det() != 1) return false;
    const Mat2 lifted = gamma_l * cls.M * gamma_l.inv();
    return mod_pos(lifted.c, n) == 0;
}

i64 gamma0_index(i64 n) {
    if (n < 1) throw std::invalid_argument("level must be positive");
    i64 idx = n, k = n;
    for (i64 p = 2; p * p <= k; ++p) {
        if (k % p) continue;
        while (k % p == 0) k /= p;
        idx = idx / p * (p + 1);
    }
    if (k > 1) idx = idx / k * (k + 1);
    return idx;
}

}  // namespace quadgeo
