#ifndef QUADGEO_CORRESPONDENCE_HPP
#define QUADGEO_CORRESPONDENCE_HPP

#include <optional>
#include <utility>

#include "quadgeo/qfield.hpp"

namespace quadgeo {

struct CosetAddress {
    int l = 1;    // 1-based class index
    Mat2 gamma;   // canonical representative of Gamma_inf gamma Gamma_l
    QuadInt xi;   // totally positive
};

// Lattice with basis rows (1, mu), (0, m) acting on (sqrt D, 1): [[mu + sqrt D, mu - sqrt D], [m, m]]
QMat2 hnf_frame(const Root& r, i64 D);

// gamma . basis_l . diag(xi, conj xi) == hnf_frame(root), checked exactly
bool parametrization_holds(const CosetAddress& a, const Root& r, const ClassGroupData& cg);

CosetAddress root_to_address(const Root& r, const ClassGroupData& cg);

// (mu, m) = det(B_l) gamma K_l (c, d)^T with gamma = [[a, b], [c, d]]
std::pair<i128, i128> explicit_root(int l, const Mat2& gamma, const ClassGroupData& cg);
std::optional<Root> address_to_root(int l, const Mat2& gamma, const ClassGroupData& cg);

// Representative of Gamma_inf gamma Gamma_l. For positively oriented cosets the sign makes
// xi totally positive, the translation puts mu in [0, m) and the power of M_l minimizes the
// Frobenius norm (ties: lexicographic). Otherwise the power of M_l minimizes the bottom-row
// norm and the translation minimizes the top row.
Mat2 canonical_double_coset(int l, const Mat2& gamma, const ClassGroupData& cg);

struct GeodesicTop {
    Root r;
    i64 D = 0;
    long double x() const { return static_cast<long double>(r.mu) / r.m; }
    long double y() const { return std::sqrt(static_cast<long double>(D)) / r.m; }
};
GeodesicTop top_of_root(const Root& r, i64 D);

struct GeodesicPosition {
    int l = 1;
    long double t = 0;  // in [0, 2 log eps0)
};
GeodesicPosition geodesic_position(const Root& r, const ClassGroupData& cg);
GeodesicPosition geodesic_position(const Root& r, const CosetAddress& a, const ClassGroupData& cg);

// Max deviation of g_l^-1 gamma^-1 n(x) a(y) k(pi/2) from +-a(e^t) modulo the stabilizer.
long double position_residual(const Root& r, const CosetAddress& a, long double t, const ClassGroupData& cg);

// gamma_l for the family m = 0, mu = nu (mod n); identity when n == 1.
Mat2 gamma_l_for(i64 n, i64 nu, int l, const ClassGroupData& cg, i64 search_bound = 200000);
bool verify_lift(int l, i64 n, const Mat2& gamma_l, const ClassGroupData& cg);
inline bool same_gamma0_coset(const Mat2& g1, const Mat2& g2, i64 n) { return mod_pos((g1 * g2.inv()).c, n) == 0; }
// [SL2(Z) : Gamma0(n)]
i64 gamma0_index(i64 n);

}  // namespace quadgeo

#endif
