#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "quadgeo/arith.hpp"
#include "quadgeo/correspondence.hpp"
#include "quadgeo/density.hpp"
#include "quadgeo/qfield.hpp"
#include "quadgeo/stats.hpp"

using namespace quadgeo;
using json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

enum exit_code { ok = 0, failure = 1, validation = 2, tolerance = 3, budget = 4 };

struct tolerance_failure : std::runtime_error {
    json report;
    tolerance_failure(const std::string& m, json r) : std::runtime_error(m), report(std::move(r)) {}
};

json jint(i128 v) {
    if (v >= std::numeric_limits<i64>::min() && v <= std::numeric_limits<i64>::max()) return static_cast<i64>(v);
    return to_string(v);
}

json jmat(const Mat2& m) { return json::array({json::array({jint(m.a), jint(m.b)}), json::array({jint(m.c), jint(m.d)})}); }

std::string fmt(double x, int prec = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

// Shared options. Every subcommand records its options in the metadata "config" block.
struct Common {
    i64 D = 2;
    i64 n = 1, nu = 0;
    std::string out = "-";
    std::string meta;
    int threads = 1;
};

class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::invalid_argument("cannot open " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void write_meta(const Common& c, const std::string& command, json config, json results, double seconds) {
    json m;
    m["format_version"] = kFormatVersion;
    m["command"] = command;
    m["config"] = std::move(config);
    m["results"] = std::move(results);
    m["timing"] = {{"elapsed_seconds", seconds}};
    std::string path = c.meta;
    if (path.empty() && c.out != "-") path = c.out + ".meta.json";
    if (path.empty() || path == "-") {
        std::cerr << m.dump(2) << "\n";
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open " + path);
    f << m.dump(2) << "\n";
}

json base_config(const Common& c) { return json{{"D", c.D}, {"n", c.n}, {"nu", c.nu}}; }

CongruenceFilter filter_of(const Discriminant& d, const Common& c) {
    return c.n == 1 ? CongruenceFilter{} : make_filter(d, c.n, c.nu);
}

PointSequence first_points(const Discriminant& d, const Common& c, i64 N, i64& M) {
    CongruenceFilter f = filter_of(d, c);
    return normalize(first_n_roots(d, N, f, M), d.D, M, f);
}

json histogram_spec_json(const HistogramSpec& s) { return json{{"lo", s.lo}, {"hi", s.hi}, {"width", s.width}}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Normalization parse_normalization(const std::string& s) {
    if (s == "one_over_2pi_vol") return Normalization::two_pi_volume;
    if (s == "one_over_vol") return Normalization::volume;
    throw std::invalid_argument("unknown normalization " + s);
}

void add_common(CLI::App* app, Common& c, bool level = true) {
    app->add_option("--D", c.D, "discriminant parameter D")->required();
    if (level) {
        app->add_option("--n", c.n, "level: keep m = 0 mod n");
        app->add_option("--nu", c.nu, "keep mu = nu mod n");
    }
    app->add_option("--out", c.out, "output file, - for stdout");
    app->add_option("--meta", c.meta, "metadata JSON path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Roots of quadratic congruences, closed geodesics and pair correlation"};
    app.require_subcommand(1);
    Common c;
    i64 M = 1000, N = 1000000;
    double Q = 1000, vmin = -4, vmax = 4, step = 0.1, width = 0.1;
    double tol = 0.05, mean_tol = 0.02, tail_tol = 0.005;
    double ilo = 0, ihi = 1;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::string mode = "uniform", input, norm_name = "one_over_2pi_vol";
    std::vector<i64> hs{1};
    double max_tail = -1;

    auto* roots = app.add_subcommand("roots", "enumerate roots with m <= M as CSV m,mu");
    add_common(roots, c);
    roots->add_option("--M", M)->required();

    auto* classgroup = app.add_subcommand("classgroup", "narrow class data as JSON");
    add_common(classgroup, c, false);

    auto* corr = app.add_subcommand("correspond-check", "round trip roots through geodesic coset addresses");
    add_common(corr, c);
    corr->add_option("--M", M, "enumerate roots with m <= M when --in is not given");
    corr->add_option("--in", input, "root CSV to check");

    auto* theory = app.add_subcommand("paircorr-theory", "limiting pair correlation density on a grid");
    add_common(theory, c);
    theory->add_option("--Q", Q, "cutoff on |q|");
    theory->add_option("--vmin", vmin);
    theory->add_option("--vmax", vmax);
    theory->add_option("--step", step);
    theory->add_option("--normalization", norm_name)->check(CLI::IsMember({"one_over_2pi_vol", "one_over_vol"}));
    theory->add_option("--max-tail", max_tail, "fail when the tail bound exceeds this");

    auto* empirical = app.add_subcommand("paircorr-empirical", "pair correlation histogram of the first N points");
    add_common(empirical, c);
    empirical->add_option("--N", N);
    empirical->add_option("--vmin", vmin);
    empirical->add_option("--vmax", vmax);
    empirical->add_option("--width", width);
    empirical->add_option("--threads", c.threads);

    auto* gaps = app.add_subcommand("gaps", "scaled cyclic gap histogram");
    add_common(gaps, c);
    gaps->add_option("--N", N);
    gaps->add_option("--width", width);
    gaps->add_option("--vmax", vmax, "upper end of the histogram");

    auto* counting = app.add_subcommand("counting", "distribution of N_I(x, N)");
    add_common(counting, c);
    counting->add_option("--N", N);
    counting->add_option("--ilo", ilo);
    counting->add_option("--ihi", ihi);
    counting->add_option("--samples", samples);
    counting->add_option("--seed", seed);
    counting->add_option("--mode", mode)->check(CLI::IsMember({"uniform", "palm", "palm_all"}));

    auto* weyl = app.add_subcommand("weyl", "exponential sums over roots");
    add_common(weyl, c, false);
    weyl->add_option("--M", M)->required();
    weyl->add_option("--freq", hs, "frequencies h")->expected(1, -1);

    auto* compare = app.add_subcommand("compare", "empirical against limiting pair correlation");
    add_common(compare, c);
    compare->add_option("--N", N);
    compare->add_option("--Q", Q);
    compare->add_option("--vmin", vmin);
    compare->add_option("--vmax", vmax);
    compare->add_option("--width", width);
    compare->add_option("--tol", tol, "max |empirical - theory| over bins");
    compare->add_option("--mean-tol", mean_tol, "mean |empirical - theory| over bins");
    compare->add_option("--tail-tol", tail_tol, "max theory tail bound");
    compare->add_option("--threads", c.threads);
    compare->add_option("--normalization", norm_name)->check(CLI::IsMember({"one_over_2pi_vol", "one_over_vol"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : validation;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Discriminant d = validate_discriminant(c.D);
        Sink sink(c.out);
        std::ostream& os = sink.os();

        if (*roots) {
            auto list = enumerate_roots(d, M, filter_of(d, c));
            write_roots_csv(os, list);
            json cfg = base_config(c);
            cfg["M"] = M;
            write_meta(c, "roots", cfg, {{"count", list.size()}}, seconds_since(t0));
        } else if (*classgroup) {
            if (!d.is_positive) throw std::invalid_argument("class group data needs D > 0");
            ClassGroupData cg = narrow_class_reps(d);
            json j;
            j["D"] = c.D;
            j["h_plus"] = cg.h_plus;
            j["eps0"] = {{"x", jint(cg.eps0.x)}, {"y", jint(cg.eps0.y)}};
            j["classes"] = json::array();
            for (const GeodesicClass& g : cg.classes)
                j["classes"].push_back({{"l", g.l},
                                        {"form", json::array({jint(g.rep.a), jint(g.rep.b), jint(g.rep.c)})},
                                        {"M_l", jmat(g.M)},
                                        {"endpoints", json::array({g.end_minus.str(), g.end_plus.str()})}});
            os << j.dump(2) << "\n";
            write_meta(c, "classgroup", {{"D", c.D}}, {{"h_plus", cg.h_plus}}, seconds_since(t0));
        } else if (*corr) {
            if (!d.is_positive) throw std::invalid_argument("the correspondence needs D > 0");
            ClassGroupData cg = narrow_class_reps(d);
            std::vector<Root> list;
            if (!input.empty()) {
                std::ifstream in(input);
                if (!in) throw std::invalid_argument("cannot open " + input);
                list = read_roots_csv(in);
            } else {
                list = enumerate_roots(d, M, filter_of(d, c));
            }
            std::size_t failures = 0;
            long double worst = 0;
            std::set<std::tuple<int, i128, i128, i128, i128>> seen;
            os << "m,mu,l,t\n";
            for (const Root& r : list) {
                CosetAddress a = root_to_address(r, cg);
                auto back = address_to_root(a.l, a.gamma, cg);
                if (!back || *back != r || !parametrization_holds(a, r, cg)) ++failures;
                seen.emplace(a.l, a.gamma.a, a.gamma.b, a.gamma.c, a.gamma.d);
                GeodesicPosition p = geodesic_position(r, a, cg);
                worst = std::max(worst, position_residual(r, a, p.t, cg));
                os << r.m << "," << r.mu << "," << a.l << "," << fmt(static_cast<double>(p.t), 15) << "\n";
            }
            json cfg = base_config(c);
            if (input.empty()) cfg["M"] = M;
            else cfg["in"] = input;
            json res{{"checked", list.size()},
                     {"roundtrip_failures", failures},
                     {"distinct_addresses", seen.size()},
                     {"max_position_residual", static_cast<double>(worst)}};
            write_meta(c, "correspond-check", cfg, res, seconds_since(t0));
            if (failures || seen.size() != list.size())
                throw tolerance_failure("round trip failures", res);
        } else if (*theory) {
            if (!(step > 0) || !(vmax >= vmin)) throw std::invalid_argument("bad v grid");
            ClassGroupData cg = narrow_class_reps(d);
            DensityProfile p = build_profile(cg, c.n, c.nu, Q, parse_normalization(norm_name));
            os << "v,w,tail_bound\n";
            double worst_tail = 0;
            const auto steps = static_cast<long>(std::floor((vmax - vmin) / step + 1e-9));
            for (long k = 0; k <= steps; ++k) {
                double v = vmin + static_cast<double>(k) * step;
                if (std::fabs(v) < 1e-12) v = 0;
                DensityValue w = w_density(p, v);
                worst_tail = std::max(worst_tail, w.tail_bound);
                os << fmt(v) << "," << fmt(w.value) << "," << fmt(w.tail_bound) << "\n";
            }
            json cfg = base_config(c);
            cfg["Q"] = Q;
            cfg["vmin"] = vmin;
            cfg["vmax"] = vmax;
            cfg["step"] = step;
            json res{{"D", c.D},
                     {"n", c.n},
                     {"nu", p.nu},
                     {"Q", Q},
                     {"kappa", static_cast<double>(p.kappa)},
                     {"h_plus", p.h_plus},
                     {"eps0", {{"x", jint(p.eps0.x)}, {"y", jint(p.eps0.y)}}},
                     {"coset_count", p.cosets.size()},
                     {"normalization_choice", to_string(p.norm)},
                     {"max_tail_bound", worst_tail}};
            write_meta(c, "paircorr-theory", cfg, res, seconds_since(t0));
            if (max_tail >= 0 && worst_tail > max_tail) throw tolerance_failure("tail bound above requested", res);
        } else if (*empirical) {
            PointSequence s = first_points(d, c, N, M);
            HistogramSpec spec{vmin, vmax, width};
            Histogram h = pair_correlation(s, spec, c.threads);
            os << "v_lo,v_hi,count,density\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                os << fmt(h.bin_lo(b)) << "," << fmt(h.bin_hi(b)) << "," << h.counts[b] << ","
                   << fmt(h.density(b, static_cast<double>(N))) << "\n";
            json cfg{{"D", c.D}, {"N", N}, {"M", M}, {"n", c.n}, {"nu", c.nu}, {"seed", nullptr},
                     {"bins", histogram_spec_json(spec)}};
            write_meta(c, "paircorr-empirical", cfg, {{"pairs_in_range", h.total - h.underflow - h.overflow}},
                       seconds_since(t0));
        } else if (*gaps) {
            PointSequence s = first_points(d, c, N, M);
            HistogramSpec spec{0, vmax > 0 ? vmax : 5, width};
            GapResult g = gap_distribution(s, spec);
            os << "s_lo,s_hi,count,density\n";
            for (std::size_t b = 0; b < g.hist.counts.size(); ++b)
                os << fmt(g.hist.bin_lo(b)) << "," << fmt(g.hist.bin_hi(b)) << "," << g.hist.counts[b] << ","
                   << fmt(g.hist.density(b, static_cast<double>(N))) << "\n";
            json cfg{{"D", c.D}, {"N", N}, {"M", M}, {"n", c.n}, {"nu", c.nu}, {"seed", nullptr},
                     {"bins", histogram_spec_json(spec)}};
            write_meta(c, "gaps", cfg, {{"scaled_sum", g.scaled_sum}, {"mean", g.mean}, {"overflow", g.hist.overflow}},
                       seconds_since(t0));
        } else if (*counting) {
            PointSequence s = first_points(d, c, N, M);
            CountMode cm = mode == "palm" ? CountMode::palm : mode == "palm_all" ? CountMode::palm_all : CountMode::uniform;
            CountingResult r = counting_statistics(s, CountWindow{ilo, ihi}, samples, seed, cm);
            os << "k,probability\n";
            for (std::size_t k = 0; k < r.prob.size(); ++k) os << k << "," << fmt(r.prob[k]) << "\n";
            json cfg{{"D", c.D}, {"N", N}, {"M", M}, {"n", c.n}, {"nu", c.nu}, {"seed", seed},
                     {"bins", nullptr}, {"window", {ilo, ihi}}, {"mode", mode}, {"samples", r.samples}};
            write_meta(c, "counting", cfg,
                       {{"mean", r.mean}, {"second_moment", r.second_moment}, {"variance", r.variance}},
                       seconds_since(t0));
        } else if (*weyl) {
            os << "h,re,im,abs,roots,normalized_abs\n";
            json res = json::array();
            for (i64 h : hs) {
                WeylResult w = weyl_sum(d, M, h);
                double a = std::abs(w.sum);
                os << h << "," << fmt(w.sum.real()) << "," << fmt(w.sum.imag()) << "," << fmt(a) << "," << w.roots
                   << "," << fmt(a / static_cast<double>(w.roots)) << "\n";
                res.push_back({{"h", h}, {"normalized_abs", a / static_cast<double>(w.roots)}});
            }
            write_meta(c, "weyl", {{"D", c.D}, {"M", M}, {"h", hs}}, res, seconds_since(t0));
        } else if (*compare) {
            PointSequence s = first_points(d, c, N, M);
            HistogramSpec spec{vmin, vmax, width};
            Histogram h = pair_correlation(s, spec, c.threads);
            ClassGroupData cg = narrow_class_reps(d);
            DensityProfile p = build_profile(cg, c.n, c.nu, Q, parse_normalization(norm_name));
            double worst = 0, mean = 0, worst_tail = 0;
            os << "v_lo,v_hi,empirical,theory,tail_bound\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                double e = h.density(b, static_cast<double>(N));
                DensityValue w = w_bin_average(p, h.bin_lo(b), h.bin_hi(b));
                worst = std::max(worst, std::fabs(e - w.value));
                mean += std::fabs(e - w.value);
                worst_tail = std::max(worst_tail, w.tail_bound);
                os << fmt(h.bin_lo(b)) << "," << fmt(h.bin_hi(b)) << "," << fmt(e) << "," << fmt(w.value) << ","
                   << fmt(w.tail_bound) << "\n";
            }
            mean /= static_cast<double>(h.counts.size());
            json cfg{{"D", c.D}, {"N", N}, {"M", M}, {"n", c.n}, {"nu", c.nu}, {"seed", nullptr},
                     {"bins", histogram_spec_json(spec)}, {"Q", Q}, {"tol", tol}, {"mean_tol", mean_tol},
                     {"tail_tol", tail_tol}};
            json res{{"kappa", static_cast<double>(p.kappa)},
                     {"h_plus", p.h_plus},
                     {"eps0", {{"x", jint(p.eps0.x)}, {"y", jint(p.eps0.y)}}},
                     {"coset_count", p.cosets.size()},
                     {"normalization_choice", to_string(p.norm)},
                     {"max_abs_diff", worst},
                     {"mean_abs_diff", mean},
                     {"max_tail_bound", worst_tail},
                     {"pass", worst <= tol && mean <= mean_tol && worst_tail <= tail_tol}};
            write_meta(c, "compare", cfg, res, seconds_since(t0));
            if (!res["pass"].get<bool>()) throw tolerance_failure("comparison outside tolerance", res);
        }
    } catch (const discriminant_error& e) {
        std::cerr << json{{"error", "validation"}, {"reason", to_string(e.reason)}, {"message", e.what()}}.dump() << "\n";
        return validation;
    } catch (const tolerance_failure& e) {
        std::cerr << json{{"error", "tolerance"}, {"message", e.what()}, {"details", e.report}}.dump() << "\n";
        return tolerance;
    } catch (const budget_error& e) {
        std::cerr << json{{"error", "budget"}, {"message", e.what()}}.dump() << "\n";
        return budget;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", "validation"}, {"message", e.what()}}.dump() << "\n";
        return validation;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return failure;
    }
    return ok;
}
