#include "quadgeo/arith.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace quadgeo {

const char* to_string(disc_reason r) {
    switch (r) {
        case disc_reason::zero: return "discriminant is zero";
        case disc_reason::square_factor: return "discriminant has a square factor";
        case disc_reason::one_mod_four: return "discriminant is 1 mod 4";
        case disc_reason::perfect_square: return "discriminant is a perfect square";
    }
    return "invalid discriminant";
}

Discriminant validate_discriminant(i64 D) {
    auto fail = [D](disc_reason r) {
        throw discriminant_error(r, std::string(to_string(r)) + " (D=" + std::to_string(D) + ")");
    };
    if (D == 0) fail(disc_reason::zero);
    if (D > 0 && is_square128(D)) fail(disc_reason::perfect_square);
    i64 a = D < 0 ? -D : D;
    for (i64 p = 2; p * p <= a; ++p) {
        if (a % (p * p) == 0) fail(disc_reason::square_factor);
        while (a % p == 0) a /= p;
    }
    if (mod_pos(D, 4) == 1) fail(disc_reason::one_mod_four);
    return Discriminant{D, D > 0};
}

CongruenceFilter make_filter(const Discriminant& d, i64 n, i64 nu) {
    if (n < 1) throw std::invalid_argument("filter modulus must be positive");
    nu = static_cast<i64>(mod_pos(nu, n));
    i128 lhs = mod_pos(static_cast<i128>(nu) * nu - d.D, n);
    if (lhs != 0) throw std::invalid_argument("nu^2 is not D mod n");
    return CongruenceFilter{n, nu};
}

FactorTable::FactorTable(i64 bound) : bound_(bound) {
    if (bound < 1) bound_ = 1;
    spf_.assign(static_cast<std::size_t>(bound_) + 1, 0);
    for (i64 i = 2; i <= bound_; ++i) {
        if (spf_[i] != 0) continue;
        spf_[i] = static_cast<std::uint32_t>(i);
        if (i > bound_ / i) continue;
        for (i64 j = i * i; j <= bound_; j += i)
            if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
    }
}

std::vector<std::pair<i64, int>> FactorTable::factor(i64 k) const {
    if (k < 1 || k > bound_) throw std::out_of_range("modulus exceeds factor table bound");
    std::vector<std::pair<i64, int>> out;
    while (k > 1) {
        i64 p = spf(k);
        int e = 0;
        while (k % p == 0) {
            k /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    return out;
}

namespace {

i64 powmod(i64 b, i64 e, i64 m) {
    i128 r = 1 % m, x = mod_pos(b, m);
    while (e > 0) {
        if (e & 1) r = r * x % m;
        x = x * x % m;
        e >>= 1;
    }
    return static_cast<i64>(r);
}

// p odd prime, a a nonzero quadratic residue mod p
i64 tonelli_shanks(i64 a, i64 p) {
    a = static_cast<i64>(mod_pos(a, p));
    if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
    i64 q = p - 1;
    int s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    i64 z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    i128 c = powmod(z, q, p);
    i128 x = powmod(a, (q + 1) / 2, p);
    i128 t = powmod(a, q, p);
    int mexp = s;
    while (t != 1) {
        int i = 0;
        i128 tt = t;
        while (tt != 1) {
            tt = tt * tt % p;
            ++i;
        }
        i128 b = c;
        for (int j = 0; j < mexp - i - 1; ++j) b = b * b % p;
        x = x * b % p;
        c = b * b % p;
        t = t * c % p;
        mexp = i;
    }
    return static_cast<i64>(x);
}

// Lift solutions mod p^k to p^(k+1) by trying every x + t p^k.
std::vector<i64> lift_by_search(i64 D, i64 p, int e) {
    std::vector<i64> cur;
    for (i64 x = 0; x < p; ++x)
        if (mod_pos(static_cast<i128>(x) * x - D, p) == 0) cur.push_back(x);
    i64 pk = p;
    for (int k = 1; k < e && !cur.empty(); ++k) {
        i64 next_mod = pk * p;
        std::vector<i64> nxt;
        for (i64 x : cur)
            for (i64 t = 0; t < p; ++t) {
                i64 y = x + t * pk;
                if (mod_pos(static_cast<i128>(y) * y - D, next_mod) == 0) nxt.push_back(y);
            }
        cur.swap(nxt);
        pk = next_mod;
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

}  // namespace

std::vector<i64> sqrt_mod_prime_power(const Discriminant& d, i64 p, int e) {
    if (e < 1) throw std::invalid_argument("exponent must be positive");
    if (p == 2 || d.D % p == 0) return lift_by_search(d.D, p, e);
    i64 a = static_cast<i64>(mod_pos(d.D, p));
    if (powmod(a, (p - 1) / 2, p) != 1) return {};
    i128 x = tonelli_shanks(a, p);
    i128 pk = p;
    for (int k = 1; k < e; ++k) {
        i128 next_mod = pk * p;
        // x <- x - (x^2 - D) / (2x) mod p^(k+1)
        i128 f = mod_pos(x * x - d.D, next_mod);
        i128 inv2x, tmp;
        ext_gcd(mod_pos(2 * x, next_mod), next_mod, inv2x, tmp);
        x = mod_pos(x - f * mod_pos(inv2x, next_mod) % next_mod, next_mod);
        pk = next_mod;
    }
    i64 r0 = static_cast<i64>(x), r1 = static_cast<i64>(pk - x);
    if (r0 > r1) std::swap(r0, r1);
    return {r0, r1};
}

std::vector<Root> roots_mod_m(const Discriminant& d, i64 m, const FactorTable& ft) {
    if (m < 1) throw std::invalid_argument("modulus must be positive");
    std::vector<i64> acc{0};
    i64 mod = 1;
    for (auto [p, e] : ft.factor(m)) {
        i64 pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        auto loc = sqrt_mod_prime_power(d, p, e);
        if (loc.empty()) return {};
        // CRT: x = a mod mod, x = b mod pe
        i128 inv, tmp;
        ext_gcd(mod_pos(mod, pe), pe, inv, tmp);
        inv = mod_pos(inv, pe);
        std::vector<i64> nxt;
        nxt.reserve(acc.size() * loc.size());
        i128 newmod = static_cast<i128>(mod) * pe;
        for (i64 a : acc)
            for (i64 b : loc) {
                i128 t = mod_pos((static_cast<i128>(b) - a) % pe * inv, pe);
                nxt.push_back(static_cast<i64>(a + t * mod));
            }
        acc.swap(nxt);
        mod = static_cast<i64>(newmod);
    }
    std::sort(acc.begin(), acc.end());
    std::vector<Root> out;
    out.reserve(acc.size());
    for (i64 mu : acc) out.push_back(Root{m, mu});
    return out;
}

void enumerate_roots(const Discriminant& d, i64 m_lo, i64 m_hi, const CongruenceFilter& filter,
                     const FactorTable& ft, const root_sink& sink) {
    if (m_lo < 1) m_lo = 1;
    i64 start = m_lo;
    if (filter.n > 1) start = ((m_lo + filter.n - 1) / filter.n) * filter.n;
    for (i64 m = start; m <= m_hi; m += filter.n)
        for (const Root& r : roots_mod_m(d, m, ft))
            if (filter.accepts(r)) sink(r);
}

std::vector<Root> enumerate_roots(const Discriminant& d, i64 M, const CongruenceFilter& filter) {
    FactorTable ft(M);
    std::vector<Root> out;
    enumerate_roots(d, 1, M, filter, ft, [&](const Root& r) { out.push_back(r); });
    return out;
}

std::vector<Root> first_n_roots(const Discriminant& d, i64 N, const CongruenceFilter& filter, i64& M_out) {
    if (N < 1) throw std::invalid_argument("point count must be positive");
    i64 M = 1024;
    while (true) {
        FactorTable ft(M);
        std::vector<Root> out;
        out.reserve(static_cast<std::size_t>(N));
        i64 last_m = 0;
        bool done = false;
        for (i64 m = 1; m <= M && !done; ++m) {
            if (m % filter.n != 0) continue;
            for (const Root& r : roots_mod_m(d, m, ft)) {
                if (!filter.accepts(r)) continue;
                out.push_back(r);
                last_m = m;
                if (static_cast<i64>(out.size()) == N) {
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            M_out = last_m;
            return out;
        }
        if (M > (i64(1) << 40)) throw std::runtime_error("root count target out of reach");
        M *= 2;
    }
}

void write_roots_csv(std::ostream& os, const std::vector<Root>& roots) {
    os << "m,mu\n";
    for (const Root& r : roots) os << r.m << ',' << r.mu << '\n';
}

std::vector<Root> read_roots_csv(std::istream& is) {
    std::vector<Root> out;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("m,", 0) == 0) continue;
        }
        std::istringstream ls(line);
        Root r;
        char comma;
        if (!(ls >> r.m >> comma >> r.mu) || comma != ',') throw std::invalid_argument("malformed root line: " + line);
        out.push_back(r);
    }
    return out;
}

}  // namespace quadgeo
