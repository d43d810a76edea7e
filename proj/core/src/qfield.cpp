#include "quadgeo/qfield.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace quadgeo {

QuadInt::QuadInt(i64 D_, i128 a_, i128 b_, i128 den_) : a(a_), b(b_), den(den_), D(D_) {
    if (den == 0) throw std::domain_error("QuadInt with zero denominator");
    if (den < 0) {
        a = -a;
        b = -b;
        den = -den;
    }
    i128 g = gcd128(gcd128(a, b), den);
    if (g > 1) {
        a /= g;
        b /= g;
        den /= g;
    }
}

int QuadInt::sign1() const {
    int sa = sgn(a), sb = sgn(b);
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    i128 a2 = mul_chk(a, a), b2 = mul_chk(mul_chk(b, b), D);
    if (a2 == b2) return 0;
    return a2 > b2 ? sa : sb;
}

long double QuadInt::embed1() const {
    long double r = std::sqrt(static_cast<long double>(D));
    long double la = static_cast<long double>(a), lb = static_cast<long double>(b);
    long double num;
    if ((a >= 0) == (b >= 0) || a == 0 || b == 0) {
        num = la + lb * r;
    } else {
        // a + b r = (a^2 - D b^2) / (a - b r), avoiding cancellation
        i128 n = sub_chk(mul_chk(a, a), mul_chk(mul_chk(b, b), D));
        num = static_cast<long double>(n) / (la - lb * r);
    }
    return num / static_cast<long double>(den);
}

std::pair<i128, i128> QuadInt::norm() const {
    i128 n = sub_chk(mul_chk(a, a), mul_chk(mul_chk(b, b), D));
    i128 d2 = mul_chk(den, den);
    i128 g = gcd128(n, d2);
    if (g == 0) g = 1;
    return {n / g, d2 / g};
}

std::string QuadInt::str() const {
    std::string s = to_string(a);
    if (b != 0) {
        s += b < 0 ? "-" : "+";
        s += to_string(abs128(b)) + "*sqrt(" + std::to_string(D) + ")";
    }
    if (den != 1) s = "(" + s + ")/" + to_string(den);
    return s;
}

namespace {
void same_field(const QuadInt& x, const QuadInt& y) {
    if (x.D != y.D && x.D != 0 && y.D != 0) throw std::invalid_argument("QuadInt field mismatch");
}
i64 field_of(const QuadInt& x, const QuadInt& y) { return x.D != 0 ? x.D : y.D; }
}  // namespace

QuadInt operator+(const QuadInt& x, const QuadInt& y) {
    same_field(x, y);
    return QuadInt(field_of(x, y), add_chk(mul_chk(x.a, y.den), mul_chk(y.a, x.den)),
                   add_chk(mul_chk(x.b, y.den), mul_chk(y.b, x.den)), mul_chk(x.den, y.den));
}

QuadInt operator-(const QuadInt& x) { return QuadInt(x.D, -x.a, -x.b, x.den); }

QuadInt operator-(const QuadInt& x, const QuadInt& y) { return x + (-y); }

QuadInt operator*(const QuadInt& x, const QuadInt& y) {
    same_field(x, y);
    i64 D = field_of(x, y);
    i128 a = add_chk(mul_chk(x.a, y.a), mul_chk(mul_chk(x.b, y.b), D));
    i128 b = add_chk(mul_chk(x.a, y.b), mul_chk(x.b, y.a));
    return QuadInt(D, a, b, mul_chk(x.den, y.den));
}

QuadInt operator*(const QuadInt& x, i128 k) { return QuadInt(x.D, mul_chk(x.a, k), mul_chk(x.b, k), x.den); }

QuadInt operator/(const QuadInt& x, const QuadInt& y) {
    same_field(x, y);
    i64 D = field_of(x, y);
    i128 n = sub_chk(mul_chk(y.a, y.a), mul_chk(mul_chk(y.b, y.b), D));
    if (n == 0) throw std::domain_error("QuadInt division by zero");
    QuadInt num = x * QuadInt(D, y.a, -y.b);
    return QuadInt(D, mul_chk(num.a, y.den), mul_chk(num.b, y.den), mul_chk(num.den, n));
}

int compare1(const QuadInt& x, const QuadInt& y) { return (x - y).sign1(); }

Mat2 operator*(const Mat2& x, const Mat2& y) {
    return Mat2{add_chk(mul_chk(x.a, y.a), mul_chk(x.b, y.c)), add_chk(mul_chk(x.a, y.b), mul_chk(x.b, y.d)),
                add_chk(mul_chk(x.c, y.a), mul_chk(x.d, y.c)), add_chk(mul_chk(x.c, y.b), mul_chk(x.d, y.d))};
}

Mat2 mat_pow(const Mat2& m, i64 k) {
    Mat2 base = k < 0 ? m.inv() : m;
    u64 e = k < 0 ? static_cast<u64>(-(k + 1)) + 1 : static_cast<u64>(k);
    Mat2 r;
    while (e > 0) {
        if (e & 1) r = r * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return r;
}

std::string Mat2::str() const {
    return "[[" + to_string(a) + "," + to_string(b) + "],[" + to_string(c) + "," + to_string(d) + "]]";
}

ProjPoint moebius(const Mat2& g, const QuadInt& x) {
    QuadInt num = x * g.a + QuadInt(x.D, g.b);
    QuadInt den = x * g.c + QuadInt(x.D, g.d);
    return ProjPoint{num, den};
}

std::string QForm::str() const { return "(" + to_string(a) + "," + to_string(b) + "," + to_string(c) + ")"; }

std::size_t QFormHash::operator()(const QForm& f) const noexcept {
    auto mix = [](u64 h, i128 v) {
        u64 lo = static_cast<u64>(v), hi = static_cast<u64>(static_cast<unsigned __int128>(v) >> 64);
        h ^= lo + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= hi + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    };
    return static_cast<std::size_t>(mix(mix(mix(0, f.a), f.b), f.c));
}

QForm substitute(const QForm& f, const Mat2& P) {
    const i128 p = P.a, q = P.b, r = P.c, s = P.d;
    QForm o;
    o.a = add_chk(add_chk(mul_chk(f.a, mul_chk(p, p)), mul_chk(f.b, mul_chk(p, r))), mul_chk(f.c, mul_chk(r, r)));
    o.b = add_chk(add_chk(mul_chk(mul_chk(2, f.a), mul_chk(p, q)), mul_chk(f.b, add_chk(mul_chk(p, s), mul_chk(q, r)))),
                  mul_chk(mul_chk(2, f.c), mul_chk(r, s)));
    o.c = add_chk(add_chk(mul_chk(f.a, mul_chk(q, q)), mul_chk(f.b, mul_chk(q, s))), mul_chk(f.c, mul_chk(s, s)));
    return o;
}

QForm act(const Mat2& g, const QForm& f) { return substitute(f, g.inv()); }

i128 pairing(const QForm& f, const QForm& g) {
    return sub_chk(mul_chk(f.b, g.b), mul_chk(2, add_chk(mul_chk(f.a, g.c), mul_chk(f.c, g.a))));
}

QuadInt evaluate(const QForm& f, const QuadInt& x) {
    return x * x * f.a + x * f.b + QuadInt(x.D, f.c);
}

QuadInt theta1(const QForm& f, i64 D) { return QuadInt(D, -f.b / 2, 1, f.a); }
QuadInt theta2(const QForm& f, i64 D) { return QuadInt(D, -f.b / 2, -1, f.a); }

QForm root_form(const Root& r, i64 D) {
    i128 num = sub_chk(mul_chk(r.mu, r.mu), D);
    if (num % r.m != 0) throw std::invalid_argument("not a root");
    return QForm{r.m, -2 * static_cast<i128>(r.mu), num / r.m};
}

bool is_reduced(const QForm& f, i64 D) {
    const i128 disc = 4 * static_cast<i128>(D);
    if (f.b <= 0 || mul_chk(f.b, f.b) >= disc) return false;
    i128 a2 = 2 * abs128(f.a);
    i128 hi = a2 + f.b, lo = a2 - f.b;
    if (mul_chk(hi, hi) <= disc) return false;
    return lo < 0 || mul_chk(lo, lo) < disc;
}

Mat2 rho_step(const QForm& f, i64 D, QForm& out) {
    const i128 disc = 4 * static_cast<i128>(D);
    const i128 c = f.c, ac2 = 2 * abs128(c);
    i128 t;
    if (mul_chk(c, c) > disc) {
        t = mod_pos(-f.b, ac2);
        if (t > abs128(c)) t -= ac2;
    } else {
        i128 s0 = isqrt128(disc);
        t = s0 - mod_pos(s0 + f.b, ac2);
    }
    i128 s = (t + f.b) / (2 * c);
    Mat2 pinv{s, 1, -1, 0};
    out = QForm{c, t, (mul_chk(t, t) - disc) / (4 * c)};
    return pinv;
}

Reduction reduce_form(const QForm& f, i64 D) {
    if (f.disc() != 4 * static_cast<i128>(D)) throw std::invalid_argument("form has wrong discriminant");
    Reduction r{f, Mat2{}};
    for (int it = 0; !is_reduced(r.form, D); ++it) {
        if (it > 100000) throw std::runtime_error("form reduction did not terminate");
        QForm nxt;
        Mat2 pinv = rho_step(r.form, D, nxt);
        r.form = nxt;
        r.transcript = pinv * r.transcript;
    }
    return r;
}

long double PellUnit::log_eps(i64 D) const {
    // x + y sqrt D with both terms positive
    return std::log(static_cast<long double>(x) + static_cast<long double>(y) * std::sqrt(static_cast<long double>(D)));
}

PellUnit pell_fundamental(const Discriminant& d) {
    if (!d.is_positive) throw std::invalid_argument("Pell unit needs D > 0");
    const i128 D = d.D;
    const i128 a0 = isqrt128(D);
    i128 m = 0, den = 1, a = a0;
    i128 p_prev = 1, p = a0, q_prev = 0, q = 1;
    for (int it = 0; it < 100000; ++it) {
        i128 nrm = sub_chk(mul_chk(p, p), mul_chk(D, mul_chk(q, q)));
        if (nrm == 1) return PellUnit{p, q};
        if (nrm == -1) {
            return PellUnit{add_chk(mul_chk(p, p), mul_chk(D, mul_chk(q, q))), mul_chk(2, mul_chk(p, q))};
        }
        m = den * a - m;
        den = (D - m * m) / den;
        a = (a0 + m) / den;
        i128 pn = add_chk(mul_chk(a, p), p_prev), qn = add_chk(mul_chk(a, q), q_prev);
        p_prev = p;
        p = pn;
        q_prev = q;
        q = qn;
    }
    throw std::runtime_error("continued fraction of sqrt D did not close");
}

std::vector<QForm> reduced_forms(i64 D) {
    const i128 disc = 4 * static_cast<i128>(D);
    std::vector<QForm> out;
    for (i128 b = 2; b * b < disc; b += 2) {
        i128 ac = (b * b - disc) / 4;
        i128 n = -ac;
        for (i128 a = 1; a * a <= n; ++a) {
            if (n % a) continue;
            for (i128 aa : {a, n / a}) {
                for (int s : {1, -1}) {
                    QForm f{s * aa, b, ac / (s * aa)};
                    if (is_reduced(f, D)) out.push_back(f);
                }
                if (a * a == n) break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Mat2 stabilizer_generator(const GeodesicClass& g, const PellUnit& eps, i64 D) {
    const QMat2& B = g.basis;
    QuadInt e1 = eps.eps(D), e2 = e1.conj();
    QuadInt det = g.det_basis;
    // basis^-1 = adj / det
    QMat2 inv{{{B[1][1] / det, -B[0][1] / det}, {-B[1][0] / det, B[0][0] / det}}};
    QMat2 left{{{B[0][0] * e1, B[0][1] * e2}, {B[1][0] * e1, B[1][1] * e2}}};
    i128 out[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            QuadInt v = left[i][0] * inv[0][j] + left[i][1] * inv[1][j];
            if (!v.is_rational() || v.den != 1) throw std::logic_error("stabilizer generator is not integral");
            out[i][j] = v.a;
        }
    Mat2 M{out[0][0], out[0][1], out[1][0], out[1][1]};
    if (M.det() != 1) throw std::logic_error("stabilizer generator has det != 1");
    return M;
}

namespace {

GeodesicClass build_class(std::vector<QForm> cyc, const PellUnit& eps, i64 D) {
    GeodesicClass g;
    std::size_t start = 0;
    bool have = false;
    for (std::size_t i = 0; i < cyc.size(); ++i)
        if (cyc[i].a > 0 && (!have || cyc[i] < cyc[start])) {
            start = i;
            have = true;
        }
    if (!have) throw std::logic_error("reduced cycle without a positive leading coefficient");
    std::rotate(cyc.begin(), cyc.begin() + static_cast<std::ptrdiff_t>(start), cyc.end());
    g.rep = cyc[0];
    g.cycle = cyc;
    g.cycle_moves.push_back(Mat2{});
    QForm cur = g.rep;
    for (std::size_t k = 1; k < cyc.size(); ++k) {
        QForm nxt;
        Mat2 pinv = rho_step(cur, D, nxt);
        if (nxt != cyc[k]) throw std::logic_error("cycle walk mismatch");
        g.cycle_moves.push_back(pinv * g.cycle_moves.back());
        cur = nxt;
    }

    const i128 m = g.rep.a;
    const i128 mu = mod_pos(-g.rep.b / 2, m);
    g.anchor = Root{narrow64(m), narrow64(mu)};
    g.anchor_form = root_form(g.anchor, D);
    i128 k = (-mu - g.rep.b / 2) / m;
    g.anchor_to_rep = mat_T(k);
    if (act(g.anchor_to_rep, g.anchor_form) != g.rep) throw std::logic_error("anchor translation mismatch");

    const QuadInt beta1(D, mu, 1), beta2(D, m);
    g.basis = QMat2{{{beta1, beta1.conj()}, {beta2, beta2.conj()}}};
    g.det_basis = g.basis[0][0] * g.basis[1][1] - g.basis[0][1] * g.basis[1][0];
    if (g.det_basis.sign1() <= 0) throw std::logic_error("basis determinant not positive");

    // inverse ideal basis: conj(I) / N(I) = [(mu - sqrt D)/m, 1]
    g.dual = {QuadInt(D, mu, -1, m), QuadInt(D, 1)};
    const std::array<QuadInt, 2> beta{beta1, beta2};
    for (int i = 0; i < 2; ++i) {
        i128 e[2][2];
        for (int j = 0; j < 2; ++j) {
            QuadInt p = g.dual[i] * beta[j];
            if (p.den != 1) throw std::logic_error("pairing of ideal with its inverse is not integral");
            e[j][0] = p.b;
            e[j][1] = p.a;
        }
        g.Bli[i] = Mat2{e[0][0], e[0][1], e[1][0], e[1][1]};
    }
    g.Bl = Mat2{g.Bli[0].a, g.Bli[1].a, g.Bli[0].c, g.Bli[1].c};
    g.det_Bl = g.Bl.det();
    g.end_minus = QuadInt(D, mu, -1, m);
    g.end_plus = QuadInt(D, mu, 1, m);
    g.M = stabilizer_generator(g, eps, D);
    return g;
}

}  // namespace

ClassGroupData narrow_class_reps(const Discriminant& d) {
    if (!d.is_positive) throw std::invalid_argument("class group data needs D > 0");
    ClassGroupData cg;
    cg.d = d;
    cg.eps0 = pell_fundamental(d);
    cg.log_eps0 = cg.eps0.log_eps(d.D);
    cg.reduced_forms = reduced_forms(d.D);

    std::set<QForm> seen;
    std::vector<std::vector<QForm>> cycles;
    for (const QForm& f : cg.reduced_forms) {
        if (seen.count(f)) continue;
        std::vector<QForm> cyc;
        QForm cur = f;
        do {
            if (!seen.insert(cur).second) throw std::logic_error("reduction cycles overlap");
            cyc.push_back(cur);
            QForm nxt;
            rho_step(cur, d.D, nxt);
            cur = nxt;
        } while (cur != f);
        cycles.push_back(std::move(cyc));
    }
    for (auto& cyc : cycles) cg.classes.push_back(build_class(cyc, cg.eps0, d.D));
    std::sort(cg.classes.begin(), cg.classes.end(),
              [](const GeodesicClass& x, const GeodesicClass& y) { return x.rep < y.rep; });
    for (std::size_t i = 0; i < cg.classes.size(); ++i) {
        cg.classes[i].l = static_cast<int>(i) + 1;
        for (std::size_t k = 0; k < cg.classes[i].cycle.size(); ++k)
            cg.index[cg.classes[i].cycle[k]] = {static_cast<int>(i), static_cast<int>(k)};
    }
    cg.h_plus = static_cast<int>(cg.classes.size());
    cg.ell = 2 * cg.h_plus * cg.log_eps0;
    return cg;
}

bool ClassGroupData::locate(const QForm& reduced, int& cls, int& pos) const {
    auto it = index.find(reduced);
    if (it == index.end()) return false;
    cls = it->second.first;
    pos = it->second.second;
    return true;
}

}  // namespace quadgeo
