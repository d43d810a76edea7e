#ifndef QUADGEO_DENSITY_HPP
#define QUADGEO_DENSITY_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadgeo/correspondence.hpp"
#include "quadgeo/qfield.hpp"

namespace quadgeo {

double h_q(double q, double s);
double s1(double q, double v);
double s2(double q, double v);

// Closed-form H_+ (sign > 0) and H_- (sign < 0) at v1 = v2 = v.
double H_closed(int sign, double q, double v);

struct QuadratureResult {
    double value = 0;
    double error = 0;
};
// Numerical integration of the defining integrals; throws std::runtime_error if tol is not met.
QuadratureResult H_quadrature(int sign, double q, double v1, double v2, double tol = 1e-10);

struct CrossRatio {
    long double q = 0;
    int sign = 0;
};
// q = (r+1)/(r-1) from the endpoint cross-ratio; sign is +1 when the backward endpoint of the
// second geodesic lies on the arc running from c1_minus to c1_plus in the positive direction.
CrossRatio cross_ratio_q(const QuadInt& c1_minus, const QuadInt& c1_plus, const QuadInt& g2_minus,
                         const QuadInt& g2_plus);

// Exact q and sign from frames: H = frame1^-1 gamma frame2, q = (H00 H11 + H01 H10) / det H,
// sign = sign of H(0). Frames have real entries in Q(sqrt D) (first embedding).
struct ExactInvariants {
    QuadInt q;
    int sign = 0;
};
ExactInvariants frame_invariants(const QMat2& frame1, const Mat2& gamma, const QMat2& frame2);

// The geodesic c_l (or gamma_l c_l at level n) used as anchor in the density sum.
struct Anchor {
    int l = 1;
    Mat2 gamma_l;      // identity for n == 1
    QForm form;        // gamma_l . anchor_form
    Mat2 M;            // gamma_l M_l gamma_l^-1
    Mat2 up;           // power of M multiplying form(theta_plus) by eps0^2
    QuadInt end_minus, end_plus;
    QMat2 frame;       // gamma_l basis_l
};
std::vector<Anchor> make_anchors(const ClassGroupData& cg, i64 n, i64 nu);

// Representative of the orbit of f under <M>, with move . f == result.
QForm canonical_in_orbit(const Anchor& a, const QForm& f, Mat2* move, const ClassGroupData& cg);

struct DoubleCosetRep {
    int l1 = 1, l2 = 1;
    Mat2 gamma;       // in Gamma0(n); image geodesic is gamma gamma_l2 c_l2
    QForm form;       // canonical form of the image geodesic
    i128 pairing = 0; // q = pairing / (4D), exact
    long double q = 0;
    int sign = 0;
};

struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnumerationStats {
    std::size_t candidates = 0;
    std::size_t balls = 0;
};

// All double cosets with |q| <= Q, each once. Throws budget_error past max_cosets.
std::vector<DoubleCosetRep> enumerate_double_cosets(const ClassGroupData& cg, i64 n, i64 nu, double Q,
                                                    EnumerationStats* stats = nullptr,
                                                    std::size_t max_cosets = 20000000);

enum class Normalization { two_pi_volume, volume };
const char* to_string(Normalization n);

long double kappa_gamma(const ClassGroupData& cg, i64 n);
long double modular_volume(i64 n);

struct DensityProfile {
    Discriminant d;
    i64 n = 1, nu = 0;
    double Q = 0;
    int h_plus = 0;
    PellUnit eps0;
    long double kappa = 0, ell = 0, volume = 0;
    Normalization norm = Normalization::two_pi_volume;
    std::vector<DoubleCosetRep> cosets;
    long double prefactor() const;
};

DensityProfile build_profile(const ClassGroupData& cg, i64 n, i64 nu, double Q,
                             Normalization norm = Normalization::two_pi_volume);

struct DensityValue {
    double value = 0;
    double tail_bound = 0;
};
// w(v); v == 0 gives the limit value.
DensityValue w_density(const DensityProfile& p, double v);
DensityValue w_at_zero(const DensityProfile& p);
// Mean of w over [lo, hi] by Gauss-Legendre on the bin.
DensityValue w_bin_average(const DensityProfile& p, double lo, double hi, int nodes = 8);

}  // namespace quadgeo

#endif
