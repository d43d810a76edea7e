#ifndef QUADGEO_STATS_HPP
#define QUADGEO_STATS_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "quadgeo/arith.hpp"
#include "quadgeo/qfield.hpp"

namespace quadgeo {

struct PointSequence {
    std::vector<double> points;  // xi_j = mu/m in enumeration order
    i64 D = 0, M = 0, n = 1, nu = 0;
    std::size_t size() const { return points.size(); }
};

PointSequence normalize(const std::vector<Root>& roots, i64 D, i64 M = 0, const CongruenceFilter& filter = {});

// N times the representative of a - b mod 1 in [-1/2, 1/2). Shared by every pair statistic so
// that binning decisions agree bit for bit.
double scaled_difference(double a, double b, std::size_t N);

struct HistogramSpec {
    double lo = -5, hi = 5, width = 0.05;
    std::size_t bins() const;
};

struct Histogram {
    HistogramSpec spec;
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0, overflow = 0, total = 0;

    explicit Histogram(const HistogramSpec& s = {});
    void add(double x);
    void merge(const Histogram& o);
    double bin_lo(std::size_t b) const { return spec.lo + static_cast<double>(b) * spec.width; }
    double bin_hi(std::size_t b) const { return spec.lo + static_cast<double>(b + 1) * spec.width; }
    // count / (norm * width)
    double density(std::size_t b, double norm) const;
};

// Ordered pairs i != j binned by N (xi_i - xi_j) in [-1/2, 1/2) scaled units.
Histogram pair_correlation(const PointSequence& seq, const HistogramSpec& spec = {}, int threads = 1);

struct GapResult {
    Histogram hist;
    double scaled_sum = 0;  // equals N
    double mean = 0;
};
GapResult gap_distribution(const PointSequence& seq, const HistogramSpec& spec = {0, 5, 0.05});

std::uint64_t splitmix64(std::uint64_t x);
// k-th uniform double in [0,1) of the stream with the given seed
double counter_uniform(std::uint64_t seed, std::uint64_t k);

struct CountWindow {
    double i_lo = 0, i_hi = 1;
};

enum class CountMode { uniform, palm, palm_all };

struct CountingResult {
    std::vector<double> prob;  // P(N_I = k)
    double mean = 0, second_moment = 0, variance = 0;
    std::size_t samples = 0;
};

// Number of j with N (xi_j - x) mod 1 in the window.
std::size_t window_count(const std::vector<double>& sorted, double x, const CountWindow& w, std::size_t N);

CountingResult counting_statistics(const PointSequence& seq, const CountWindow& w, std::size_t samples,
                                   std::uint64_t seed, CountMode mode = CountMode::uniform);

struct LogBoundRow {
    double y = 0;
    i64 M = 0;
    std::size_t roots = 0;
    std::size_t max_count = 0;
    double ratio = 0;  // max_count / log(1/y)
};
struct LogBoundResult {
    std::vector<LogBoundRow> rows;
    double slope = 0;  // least-squares slope of max_count against log(1/y)
};
// For each y: roots with m <= sqrt(D)/y, maximal number of them in an interval x + y [0, len) mod 1.
LogBoundResult log_bound_check(const Discriminant& d, const std::vector<double>& ys, double length = 1);

// Largest number of points of a sorted sample of [0,1) in a half-open arc of length L.
std::size_t max_arc_count(const std::vector<double>& sorted, double L);

struct WeylResult {
    std::complex<double> sum;
    std::size_t roots = 0;
};
WeylResult weyl_sum(const Discriminant& d, i64 M, i64 h);

struct ChiSquareResult {
    double statistic = 0;
    double p_value = 1;
    std::size_t dof = 0;
    std::vector<std::uint64_t> counts;
};
// Occupancy of an nx by nt grid on [0,1) x [0, period) against the uniform product measure.
ChiSquareResult joint_equidistribution(const std::vector<std::pair<double, double>>& points, double period,
                                       std::size_t nx, std::size_t nt);

// sup |F_N(x) - x| of the empirical distribution function
double discrepancy(std::vector<double> points);

}  // namespace quadgeo

#endif
