#ifndef QUADGEO_QFIELD_HPP
#define QUADGEO_QFIELD_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "quadgeo/arith.hpp"
#include "quadgeo/int128.hpp"

namespace quadgeo {

// (a + b*sqrt(D)) / den, den > 0, lowest terms.
struct QuadInt {
    i128 a = 0, b = 0, den = 1;
    i64 D = 0;

    QuadInt() = default;
    QuadInt(i64 D_, i128 a_, i128 b_ = 0, i128 den_ = 1);

    QuadInt conj() const { return QuadInt(D, a, -b, den); }
    // signs of the two real embeddings, decided in integer arithmetic
    int sign1() const;
    int sign2() const { return conj().sign1(); }
    bool totally_positive() const { return sign1() > 0 && sign2() > 0; }
    bool is_zero() const { return a == 0 && b == 0; }
    bool is_rational() const { return b == 0; }
    long double embed1() const;
    long double embed2() const { return conj().embed1(); }
    // norm as a reduced fraction num/den
    std::pair<i128, i128> norm() const;
    std::string str() const;

    bool operator==(const QuadInt& o) const { return a == o.a && b == o.b && den == o.den; }
};

QuadInt operator+(const QuadInt& x, const QuadInt& y);
QuadInt operator-(const QuadInt& x, const QuadInt& y);
QuadInt operator-(const QuadInt& x);
QuadInt operator*(const QuadInt& x, const QuadInt& y);
QuadInt operator/(const QuadInt& x, const QuadInt& y);
QuadInt operator*(const QuadInt& x, i128 k);
// sign of x - y in the first embedding
int compare1(const QuadInt& x, const QuadInt& y);

struct Mat2 {
    i128 a = 1, b = 0, c = 0, d = 1;
    i128 det() const { return sub_chk(mul_chk(a, d), mul_chk(b, c)); }
    i128 trace() const { return add_chk(a, d); }
    // inverse of a determinant-one matrix
    Mat2 inv() const { return Mat2{d, -b, -c, a}; }
    Mat2 neg() const { return Mat2{-a, -b, -c, -d}; }
    i128 frob2() const { return add_chk(add_chk(mul_chk(a, a), mul_chk(b, b)), add_chk(mul_chk(c, c), mul_chk(d, d))); }
    bool operator==(const Mat2&) const = default;
    std::string str() const;
};

Mat2 operator*(const Mat2& x, const Mat2& y);
Mat2 mat_pow(const Mat2& m, i64 k);
inline Mat2 mat_S() { return Mat2{0, -1, 1, 0}; }
inline Mat2 mat_T(i128 k = 1) { return Mat2{1, k, 0, 1}; }

// Moebius image of a real quadratic irrational (first embedding); den == 0 marks infinity
struct ProjPoint {
    QuadInt num, den;
};
ProjPoint moebius(const Mat2& g, const QuadInt& x);

// a X^2 + b XY + c Y^2
struct QForm {
    i128 a = 0, b = 0, c = 0;
    i128 disc() const { return sub_chk(mul_chk(b, b), mul_chk(4, mul_chk(a, c))); }
    QForm neg() const { return QForm{-a, -b, -c}; }
    auto operator<=>(const QForm&) const = default;
    std::string str() const;
};

struct QFormHash {
    std::size_t operator()(const QForm& f) const noexcept;
};

// f composed with P as a substitution: (f o P)(x, y) = f(P (x, y))
QForm substitute(const QForm& f, const Mat2& P);
// left action g.f = f o g^-1; the geodesic of g.f is the image of the geodesic of f under g
QForm act(const Mat2& g, const QForm& f);
// symmetric pairing with B(f, f) = disc(f)
i128 pairing(const QForm& f, const QForm& g);
// f(x, 1) for x in Q(sqrt D)
QuadInt evaluate(const QForm& f, const QuadInt& x);
// roots of f(x,1): theta1 = (-b + sqrt(disc)) / 2a is the forward endpoint of the
// oriented geodesic of f, theta2 = (-b - sqrt(disc)) / 2a the backward one.
QuadInt theta1(const QForm& f, i64 D);
QuadInt theta2(const QForm& f, i64 D);
QForm root_form(const Root& r, i64 D);

bool is_reduced(const QForm& f, i64 D);
// One reduction step rho(f) = P^-1 . f; returns P^-1.
Mat2 rho_step(const QForm& f, i64 D, QForm& out);

struct Reduction {
    QForm form;
    Mat2 transcript;  // transcript . f == form
};
Reduction reduce_form(const QForm& f, i64 D);

struct PellUnit {
    i128 x = 1, y = 0;
    QuadInt eps(i64 D) const { return QuadInt(D, x, y); }
    long double log_eps(i64 D) const;
};
PellUnit pell_fundamental(const Discriminant& d);

using QMat2 = std::array<std::array<QuadInt, 2>, 2>;

struct GeodesicClass {
    int l = 1;                       // 1-based
    QForm rep;                       // least reduced form with a > 0 in its cycle
    std::vector<QForm> cycle;        // cycle[0] == rep
    std::vector<Mat2> cycle_moves;   // cycle[k] == cycle_moves[k] . rep
    Root anchor;                     // (m_l, mu_l), mu_l in [0, m_l)
    QForm anchor_form;               // root_form(anchor)
    Mat2 anchor_to_rep;              // anchor_to_rep . anchor_form == rep
    QMat2 basis;                     // rows: both embeddings of beta_1 = mu_l + sqrt D, beta_2 = m_l
    QuadInt det_basis;
    std::array<QuadInt, 2> dual;     // basis of the inverse ideal
    std::array<Mat2, 2> Bli;         // Bli[i] rows j, cols k: conj-dual_i * beta_j = b_ij1 sqrt D + b_ij2
    Mat2 Bl;
    i128 det_Bl = 1;
    Mat2 M;                          // basis diag(eps0, 1/eps0) basis^-1
    QuadInt end_minus, end_plus;     // (mu_l -+ sqrt D) / m_l
};

struct ClassGroupData {
    Discriminant d;
    int h_plus = 0;
    PellUnit eps0;
    long double log_eps0 = 0;
    long double ell = 0;  // 2 h_plus log eps0
    std::vector<GeodesicClass> classes;
    std::vector<QForm> reduced_forms;
    std::map<QForm, std::pair<int, int>> index;

    // class index (0-based) and cycle position of a reduced form
    bool locate(const QForm& reduced, int& cls, int& pos) const;
};

std::vector<QForm> reduced_forms(i64 D);
ClassGroupData narrow_class_reps(const Discriminant& d);
Mat2 stabilizer_generator(const GeodesicClass& g, const PellUnit& eps, i64 D);

}  // namespace quadgeo

#endif
