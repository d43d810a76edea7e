#include "quadgeo/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace quadgeo {

PointSequence normalize(const std::vector<Root>& roots, i64 D, i64 M, const CongruenceFilter& filter) {
    PointSequence s;
    s.D = D;
    s.M = M;
    s.n = filter.n;
    s.nu = filter.nu;
    s.points.reserve(roots.size());
    for (const Root& r : roots) s.points.push_back(static_cast<double>(r.mu) / static_cast<double>(r.m));
    return s;
}

double scaled_difference(double a, double b, std::size_t N) {
    double d = a - b;
    if (d >= 0.5) d -= 1;
    else if (d < -0.5) d += 1;
    return d * static_cast<double>(N);
}

std::size_t HistogramSpec::bins() const {
    if (!(hi > lo) || !(width > 0)) throw std::invalid_argument("bad histogram range");
    return static_cast<std::size_t>(std::llround((hi - lo) / width));
}

Histogram::Histogram(const HistogramSpec& s) : spec(s), counts(s.bins(), 0) {}

void Histogram::add(double x) {
    ++total;
    if (x < spec.lo) {
        ++underflow;
        return;
    }
    double f = std::floor((x - spec.lo) / spec.width);
    if (!(f < static_cast<double>(counts.size()))) {
        ++overflow;
        return;
    }
    ++counts[static_cast<std::size_t>(f)];
}

void Histogram::merge(const Histogram& o) {
    if (o.counts.size() != counts.size()) throw std::invalid_argument("histogram shape mismatch");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    underflow += o.underflow;
    overflow += o.overflow;
    total += o.total;
}

double Histogram::density(std::size_t b, double norm) const {
    return static_cast<double>(counts[b]) / (norm * spec.width);
}

Histogram pair_correlation(const PointSequence& seq, const HistogramSpec& spec, int threads) {
    const std::size_t N = seq.size();
    const double V = std::max(std::fabs(spec.lo), std::fabs(spec.hi));
    if (N >= 2 && !(V < static_cast<double>(N) / 2)) throw std::invalid_argument("histogram range too wide for N");
    std::vector<double> x = seq.points;
    std::sort(x.begin(), x.end());
    // pairs with forward cyclic distance up to V/N, a little slack so that the histogram decides the edge
    const double reach = (V + 1e-6) / static_cast<double>(N);

    auto work = [&](std::size_t from, std::size_t to, Histogram& h) {
        for (std::size_t i = from; i < to; ++i) {
            for (std::size_t k = 1; k < N; ++k) {
                std::size_t j = i + k;
                double fwd = j < N ? x[j] - x[i] : x[j - N] + 1 - x[i];
                if (j >= N) j -= N;
                if (fwd > reach) break;
                h.add(scaled_difference(x[j], x[i], N));
                h.add(scaled_difference(x[i], x[j], N));
            }
        }
    };
    const std::size_t T = static_cast<std::size_t>(std::max(1, threads));
    std::vector<Histogram> parts(T, Histogram(spec));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t from = N * t / T, to = N * (t + 1) / T;
        if (T == 1) work(from, to, parts[t]);
        else pool.emplace_back(work, from, to, std::ref(parts[t]));
    }
    for (auto& th : pool) th.join();
    Histogram out(spec);
    for (const Histogram& h : parts) out.merge(h);
    return out;
}

GapResult gap_distribution(const PointSequence& seq, const HistogramSpec& spec) {
    const std::size_t N = seq.size();
    if (N < 2) throw std::invalid_argument("gap distribution needs two points");
    std::vector<double> x = seq.points;
    std::sort(x.begin(), x.end());
    GapResult r{Histogram(spec), 0, 0};
    double sum = 0, comp = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double g = i + 1 < N ? x[i + 1] - x[i] : x[0] + 1 - x[i];
        double s = g * static_cast<double>(N);
        r.hist.add(s);
        double t = sum + s;
        comp += std::fabs(sum) >= std::fabs(s) ? (sum - t) + s : (s - t) + sum;
        sum = t;
    }
    r.scaled_sum = sum + comp;
    r.mean = r.scaled_sum / static_cast<double>(N);
    return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t v = splitmix64(splitmix64(seed) ^ (k * 0xd1b54a32d192ed03ULL));
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

std::size_t window_count(const std::vector<double>& sorted, double x, const CountWindow& w, std::size_t N) {
    const double n = static_cast<double>(N);
    const double lo = x + w.i_lo / n - 1e-9, hi = x + w.i_hi / n + 1e-9;
    std::size_t count = 0;
    // candidates from the three translates of the window that meet [0,1)
    for (double shift : {-1.0, 0.0, 1.0}) {
        double a = lo + shift, b = hi + shift;
        if (b < 0 || a >= 1) continue;
        auto first = std::lower_bound(sorted.begin(), sorted.end(), a);
        for (auto it = first; it != sorted.end() && *it <= b; ++it) {
            double s = scaled_difference(*it, x, N);
            if (s >= w.i_lo && s < w.i_hi) ++count;
        }
    }
    return count;
}

CountingResult counting_statistics(const PointSequence& seq, const CountWindow& w, std::size_t samples,
                                   std::uint64_t seed, CountMode mode) {
    const std::size_t N = seq.size();
    if (N == 0) throw std::invalid_argument("empty point sequence");
    if (!(w.i_lo < w.i_hi)) throw std::invalid_argument("empty window");
    if (!(std::max(std::fabs(w.i_lo), std::fabs(w.i_hi)) < static_cast<double>(N) / 2))
        throw std::invalid_argument("window too wide for N");
    std::vector<double> x = seq.points;
    std::sort(x.begin(), x.end());
    if (mode == CountMode::palm_all) samples = N;
    if (samples == 0) throw std::invalid_argument("need at least one sample");
    std::vector<std::uint64_t> hist;
    double s1 = 0, s2 = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        double at;
        if (mode == CountMode::uniform) {
            at = counter_uniform(seed, k);
        } else if (mode == CountMode::palm) {
            auto p = static_cast<std::size_t>(counter_uniform(seed, k) * static_cast<double>(N));
            at = seq.points[std::min(p, N - 1)];
        } else {
            at = seq.points[k];
        }
        std::size_t c = window_count(x, at, w, N);
        if (c >= hist.size()) hist.resize(c + 1, 0);
        ++hist[c];
        s1 += static_cast<double>(c);
        s2 += static_cast<double>(c) * static_cast<double>(c);
    }
    CountingResult r;
    r.samples = samples;
    for (std::uint64_t h : hist) r.prob.push_back(static_cast<double>(h) / static_cast<double>(samples));
    r.mean = s1 / static_cast<double>(samples);
    r.second_moment = s2 / static_cast<double>(samples);
    r.variance = r.second_moment - r.mean * r.mean;
    return r;
}

std::size_t max_arc_count(const std::vector<double>& sorted, double L) {
    const std::size_t N = sorted.size();
    if (N == 0) return 0;
    if (L >= 1) throw std::invalid_argument("arc length must be below 1");
    // an optimal arc can be taken to start at a point
    std::size_t best = 0, j = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (j < i) j = i;
        auto val = [&](std::size_t k) { return k < N ? sorted[k] : sorted[k - N] + 1; };
        while (j < i + N && val(j) - sorted[i] < L) ++j;
        best = std::max(best, j - i);
    }
    return best;
}

LogBoundResult log_bound_check(const Discriminant& d, const std::vector<double>& ys, double length) {
    LogBoundResult out;
    for (double y : ys) {
        if (!(y > 0 && y < 1)) throw std::invalid_argument("y must lie in (0,1)");
        LogBoundRow row;
        row.y = y;
        row.M = static_cast<i64>(std::floor(std::sqrt(static_cast<double>(d.D)) / y));
        std::vector<Root> roots = enumerate_roots(d, row.M);
        std::vector<double> x;
        x.reserve(roots.size());
        for (const Root& r : roots) x.push_back(static_cast<double>(r.mu) / static_cast<double>(r.m));
        std::sort(x.begin(), x.end());
        row.roots = x.size();
        row.max_count = max_arc_count(x, y * length);
        row.ratio = static_cast<double>(row.max_count) / std::log(1 / y);
        out.rows.push_back(row);
    }
    if (out.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, n = static_cast<double>(out.rows.size());
        for (const auto& r : out.rows) {
            double a = std::log(1 / r.y), b = static_cast<double>(r.max_count);
            sx += a;
            sy += b;
            sxx += a * a;
            sxy += a * b;
        }
        out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return out;
}

WeylResult weyl_sum(const Discriminant& d, i64 M, i64 h) {
    if (h == 0) throw std::invalid_argument("h must be nonzero");
    WeylResult r;
    long double re = 0, im = 0;
    FactorTable ft(M);
    enumerate_roots(d, 1, M, CongruenceFilter{}, ft, [&](const Root& root) {
        // reduce h mu mod m exactly before taking the angle
        i128 num = mod_pos(static_cast<i128>(h) * root.mu, root.m);
        long double ang = 2 * std::numbers::pi_v<long double> * static_cast<long double>(num) / root.m;
        re += std::cos(ang);
        im += std::sin(ang);
        ++r.roots;
    });
    r.sum = {static_cast<double>(re), static_cast<double>(im)};
    return r;
}

ChiSquareResult joint_equidistribution(const std::vector<std::pair<double, double>>& points, double period,
                                       std::size_t nx, std::size_t nt) {
    if (nx == 0 || nt == 0 || !(period > 0)) throw std::invalid_argument("bad grid");
    ChiSquareResult r;
    r.counts.assign(nx * nt, 0);
    for (auto [x, t] : points) {
        auto i = std::min(nx - 1, static_cast<std::size_t>(x * static_cast<double>(nx)));
        auto j = std::min(nt - 1, static_cast<std::size_t>(t / period * static_cast<double>(nt)));
        ++r.counts[i * nt + j];
    }
    const std::size_t cells = nx * nt;
    r.dof = cells - 1;
    if (cells == 1 || points.empty()) return r;
    const double expect = static_cast<double>(points.size()) / static_cast<double>(cells);
    for (std::uint64_t c : r.counts) {
        double dlt = static_cast<double>(c) - expect;
        r.statistic += dlt * dlt / expect;
    }
    boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

double discrepancy(std::vector<double> points) {
    std::sort(points.begin(), points.end());
    const double n = static_cast<double>(points.size());
    double best = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        best = std::max(best, static_cast<double>(i + 1) / n - points[i]);
        best = std::max(best, points[i] - static_cast<double>(i) / n);
    }
    return best;
}

}  // namespace quadgeo
