#ifndef QUADGEO_INT128_HPP
#define QUADGEO_INT128_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace quadgeo {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

struct overflow_error : std::overflow_error {
    using std::overflow_error::overflow_error;
};

inline i128 add_chk(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw overflow_error("i128 add overflow");
    return r;
}

inline i128 sub_chk(i128 a, i128 b) {
    i128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw overflow_error("i128 sub overflow");
    return r;
}

inline i128 mul_chk(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("i128 mul overflow");
    return r;
}

inline i128 abs128(i128 a) { return a < 0 ? -a : a; }

inline int sgn(i128 a) { return (a > 0) - (a < 0); }

inline i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// floor division and nonnegative remainder
inline i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline i128 mod_pos(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + (m < 0 ? -m : m) : r;
}

// x*u + y*v = g = gcd(a,b) >= 0
inline i128 ext_gcd(i128 a, i128 b, i128& x, i128& y) {
    i128 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i128 q = a / b;
        i128 t = a - q * b;
        a = b;
        b = t;
        t = x0 - q * x1;
        x0 = x1;
        x1 = t;
        t = y0 - q * y1;
        y0 = y1;
        y1 = t;
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    x = x0;
    y = y0;
    return a;
}

// floor(sqrt(n)) for n >= 0
inline i128 isqrt128(i128 n) {
    if (n < 0) throw std::domain_error("isqrt of negative");
    if (n < 2) return n;
    long double g = std::sqrt(static_cast<long double>(n));
    i128 r = static_cast<i128>(g);
    while (r > 0 && (r > n / r)) --r;
    while ((r + 1) <= n / (r + 1)) ++r;
    return r;
}

inline bool is_square128(i128 n) {
    if (n < 0) return false;
    i128 r = isqrt128(n);
    return r * r == n;
}

inline std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                              : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return std::string(s.rbegin(), s.rend());
}

inline i64 narrow64(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw overflow_error("value exceeds 64 bits");
    return static_cast<i64>(v);
}

}  // namespace quadgeo

#endif
