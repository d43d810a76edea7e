#ifndef QUADGEO_ARITH_HPP
#define QUADGEO_ARITH_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quadgeo/int128.hpp"

namespace quadgeo {

enum class disc_reason { zero, square_factor, one_mod_four, perfect_square };

const char* to_string(disc_reason r);

struct discriminant_error : std::invalid_argument {
    disc_reason reason;
    discriminant_error(disc_reason r, const std::string& msg) : std::invalid_argument(msg), reason(r) {}
};

struct Discriminant {
    i64 D = 0;
    bool is_positive = false;
};

// Throws discriminant_error when D is zero, has a square factor, is 1 mod 4 or is a square.
Discriminant validate_discriminant(i64 D);

struct Root {
    i64 m = 1;
    i64 mu = 0;
    auto operator<=>(const Root&) const = default;
};

struct CongruenceFilter {
    i64 n = 1;
    i64 nu = 0;
    bool trivial() const { return n == 1; }
    bool accepts(const Root& r) const { return r.m % n == 0 && mod_pos(r.mu - nu, n) == 0; }
};

// Throws std::invalid_argument unless nu^2 = D mod n.
CongruenceFilter make_filter(const Discriminant& d, i64 n, i64 nu);

class FactorTable {
public:
    explicit FactorTable(i64 bound);
    i64 bound() const { return bound_; }
    i64 spf(i64 k) const { return spf_[static_cast<std::size_t>(k)]; }
    // prime-power factorization in increasing prime order
    std::vector<std::pair<i64, int>> factor(i64 k) const;

private:
    i64 bound_;
    std::vector<std::uint32_t> spf_;
};

// Residues x mod p^e with x^2 = D.
std::vector<i64> sqrt_mod_prime_power(const Discriminant& d, i64 p, int e);

// Sorted roots of mu^2 = D mod m; m must not exceed the table bound.
std::vector<Root> roots_mod_m(const Discriminant& d, i64 m, const FactorTable& ft);

using root_sink = std::function<void(const Root&)>;

// All roots with m_lo <= m <= m_hi passing the filter, m ascending then mu ascending.
void enumerate_roots(const Discriminant& d, i64 m_lo, i64 m_hi, const CongruenceFilter& filter,
                     const FactorTable& ft, const root_sink& sink);

std::vector<Root> enumerate_roots(const Discriminant& d, i64 M, const CongruenceFilter& filter = {});

// Smallest M such that at least N roots pass the filter with m <= M, found by doubling.
std::vector<Root> first_n_roots(const Discriminant& d, i64 N, const CongruenceFilter& filter, i64& M_out);

void write_roots_csv(std::ostream& os, const std::vector<Root>& roots);
std::vector<Root> read_roots_csv(std::istream& is);

}  // namespace quadgeo

#endif
