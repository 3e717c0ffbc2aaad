#pragma once

// Batch experiments behind the denjoy-lab command line: typed parameter tables, a registry
// of named experiments, and a runner that writes CSV artifacts plus a manifest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "denjoy/acceptance.hpp"
#include "denjoy/constructions.hpp"
#include "denjoy/distortion.hpp"
#include "denjoy/ergodic.hpp"
#include "denjoy/io.hpp"
#include "denjoy/sacksteder.hpp"
#include "denjoy/walks.hpp"

namespace denjoy {

// A failed numerical claim inside an experiment (exit status 2).
struct assertion_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamKey {
    std::string name;
    std::string value;  // default
    std::string help;
};

class Params {
public:
    explicit Params(std::vector<ParamKey> keys) : keys_(std::move(keys)) {}

    void set(const std::string& key, const std::string& value) {
        for (auto& k : keys_)
            if (k.name == key) {
                k.value = value;
                return;
            }
        throw config_error("unknown key '" + key + "'");
    }
    const std::string& str(const std::string& key) const {
        for (const auto& k : keys_)
            if (k.name == key) return k.value;
        throw internal_error("experiment reads undeclared key '" + key + "'");
    }
    double num(const std::string& key) const { return parse_double(str(key), key); }
    long integer(const std::string& key) const { return parse_long(str(key), key); }
    int small(const std::string& key, long lo = 0, long hi = 1000000000) const {
        const long v = integer(key);
        if (v < lo || v > hi)
            throw config_error("key '" + key + "': " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
        return int(v);
    }
    double positive(const std::string& key) const {
        const double v = num(key);
        if (!(v > 0)) throw config_error("key '" + key + "' must be positive");
        return v;
    }
    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : split(str(key), ';')) out.push_back(parse_double(s, key));
        return out;
    }
    std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
        const auto& v = str(key);
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string all;
            for (const auto& a : allowed) all += (all.empty() ? "" : "|") + a;
            throw config_error("key '" + key + "': '" + v + "' is not one of " + all);
        }
        return v;
    }
    const std::vector<ParamKey>& keys() const { return keys_; }

private:
    std::vector<ParamKey> keys_;
};

struct Check {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct PlotSpec {
    std::string file;
    std::string title;
    std::vector<Series> series;
    bool log_y = false;
};

struct Outcome {
    std::vector<std::pair<std::string, std::string>> artifacts;  // file name, bytes
    std::vector<Check> checks;
    std::vector<PlotSpec> plots;
    std::vector<std::pair<std::string, std::string>> summary;

    void add(std::string file, const Csv& csv) { artifacts.emplace_back(std::move(file), csv.str()); }
    void check(std::string name, bool ok, std::string detail = "") {
        checks.push_back({std::move(name), ok, std::move(detail)});
    }
    void note(const std::string& key, double v) { summary.emplace_back(key, fmt(v)); }
    void note(const std::string& key, const std::string& v) { summary.emplace_back(key, v); }
    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
    }
};

struct Experiment {
    std::string name;
    std::string about;
    std::vector<ParamKey> keys;
    std::function<void(const Params&, std::uint64_t, Outcome&)> run;
};

namespace lab {

inline std::vector<ParamKey> gap_keys(const std::string& R = "200", const std::string& min_mass = "0.4") {
    GapSpec s;
    return {{"d", "2", "number of commuting generators"},
            {"m", "8", "offset inside the logarithm of the gap lengths"},
            {"epsilon", "1", "extra logarithmic exponent"},
            {"R", R, "truncation radius (l1 ball of realized indices)"},
            {"theta", fmt(s.theta[0]) + ";" + fmt(s.theta[1]), "rotation angles, ';'-separated (circle only)"},
            {"base_point", "0", "circle coordinate of the base gap"},
            {"min_mass_fraction", min_mass, "refuse builds keeping less of the gap mass"}};
}

inline GapSpec gap_spec(const Params& p) {
    GapSpec s;
    s.d = p.small("d", 1, 8);
    s.m = p.small("m", 2);
    s.epsilon = p.positive("epsilon");
    s.R = p.small("R", 1, 100000);
    s.theta = p.list("theta");
    s.base_point = p.num("base_point");
    s.min_mass_fraction = p.num("min_mass_fraction");
    return s;
}

inline std::vector<ParamKey> with(std::vector<ParamKey> a, const std::vector<ParamKey>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

struct Scenario {
    GeneratorMeasure mu;
    bool rotation = false;
};

inline const std::vector<std::string> scenarios = {"rotation", "symmetric-rotation", "psl", "north-south"};

inline Scenario scenario(const Params& p) {
    const auto s = p.choice("scenario", scenarios);
    if (s == "rotation") return {rotation_measure(), true};
    if (s == "symmetric-rotation") return {symmetric_rotation_measure(), true};
    if (s == "psl") return {psl_pair(), false};
    return {GeneratorMeasure::symmetrized({north_south(4.0, 0.1)}, {1.0}), false};
}

inline ParamKey scenario_key(const std::string& def = "psl") {
    return {"scenario", def, "generator law: rotation | symmetric-rotation | psl | north-south"};
}

inline std::vector<ParamKey> solve_keys() {
    return {{"grid", std::to_string(default_grid), "CDF grid cells"},
            {"solve_tol", "1e-3", "stationarity residual (sup-CDF) to stop the Cesaro average"},
            {"max_iter", "100000", "Cesaro terms at most"},
            {"polish", "3000", "plain diffusion steps after the average"}};
}

inline StationaryReport stationary_for(const GeneratorMeasure& mu, const Params& p) {
    return solve_stationary(mu, MeasureCDF::lebesgue(p.small("grid", 16)), p.positive("solve_tol"),
                            p.integer("max_iter"), p.integer("polish"));
}

inline MeasureCDF stationary_measure(const GeneratorMeasure& mu, const Params& p) {
    const auto r = stationary_for(mu, p);
    if (!r.converged)
        throw assertion_failure("stationary solve did not reach solve_tol (residual " + fmt(r.residual) + ")");
    return r.measure;
}

inline std::vector<double> as_doubles(const std::vector<long>& v) { return {v.begin(), v.end()}; }

inline Diffeo kopell_map(const Params& p) {
    const double c = p.num("c");
    if (!(c > 2)) throw config_error("key 'c' must exceed 2 so that x/(c-x) contracts [0,1]");
    return mobius_interval({1.0, 0.0, -1.0, c});
}

// Commutation, semiconjugacy and endpoint tangency on sampled points of a circle system.
struct HealthSample {
    double commutator = 0.0, semiconjugacy = 0.0, endpoint = 0.0;
    long samples = 0;
};

inline HealthSample circle_health(const GapSystem& sys, long samples, std::uint64_t seed) {
    HealthSample h;
    const auto& cat = sys.catalog();
    const int R = sys.spec().R, d = sys.spec().d;
    Rng rng = Rng::substream(seed, 0);
    long tries = 0;
    while (h.samples < samples && tries++ < 100 * samples) {
        const double x = rng.uniform();
        std::size_t k;
        if (cat.in_gap(x, k) && l1_norm(sys.gaps()[k].idx) > R - 2) continue;
        ++h.samples;
        for (int i = 0; i < d; ++i) {
            const auto& f = sys.generator(i);
            h.semiconjugacy = std::max(h.semiconjugacy, std::abs(circle_diff(sys.collapse(f(x)),
                                                                             sys.collapse(x) + sys.spec().theta[std::size_t(i)])));
            for (int j = i + 1; j < d; ++j) {
                const auto& g = sys.generator(j);
                h.commutator = std::max(h.commutator, std::abs(circle_diff(f(g(x)), g(f(x)))));
            }
        }
    }
    for (const auto& gap : sys.gaps()) {
        if (l1_norm(gap.idx) > R - 1) continue;
        for (int j = 0; j < d; ++j)
            h.endpoint = std::max({h.endpoint, std::abs(sys.generator(j).deriv(gap.left) - 1.0),
                                   std::abs(sys.generator(j).deriv(gap.right()) - 1.0)});
    }
    return h;
}

inline Csv summary_csv(const Outcome& o) {
    Csv c({"key", "value"});
    for (const auto& [k, v] : o.summary) c.raw({k, v});
    return c;
}

// ---------------------------------------------------------------------------

inline void denjoy_build(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sys = build_circle_denjoy(gap_spec(p));
    o.artifacts.emplace_back("gaps.csv", export_gap_system(sys));
    const auto h = circle_health(sys, p.integer("samples"), seed);
    o.note("gaps", double(sys.gaps().size()));
    o.note("realized_mass", sys.total_gap_mass());
    o.note("remainder_mass", sys.catalog().rho);
    o.note("samples", double(h.samples));
    o.note("max_commutator", h.commutator);
    o.note("max_semiconjugacy_error", h.semiconjugacy);
    o.note("max_endpoint_derivative_error", h.endpoint);
    o.check("generators commute", h.commutator < 1e-9, fmt(h.commutator));
    o.check("semiconjugate to the rotations", h.semiconjugacy < 1e-9, fmt(h.semiconjugacy));
    o.check("derivative 1 at gap endpoints", h.endpoint < 1e-6, fmt(h.endpoint));
}

inline void pixton_build(const Params& p, std::uint64_t, Outcome& o) {
    const auto sys = build_interval_pixton(gap_spec(p));
    o.artifacts.emplace_back("gaps.csv", export_gap_system(sys));
    const int R = sys.spec().R, d = sys.spec().d;
    double comm = 0.0;
    for (const auto& gap : sys.gaps()) {
        if (l1_norm(gap.idx) > R - 2) continue;
        const double x = gap.left + 0.37 * gap.length;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const auto &f = sys.generator(i), &g = sys.generator(j);
                comm = std::max(comm, std::abs(f(g(x)) - g(f(x))));
            }
    }
    o.note("gaps", double(sys.gaps().size()));
    o.note("realized_mass", sys.total_gap_mass());
    o.note("remainder_mass", sys.remainder_mass());
    o.note("max_commutator", comm);
    o.check("generators commute on realized gaps", comm < 1e-9, fmt(comm));
}

inline void holder_scan(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto over = p.choice("over", {"m", "R"});
    const auto mod_name = p.choice("modulus", {"log_power", "power"});
    const auto expect = p.choice("expect", {"decreasing", "increasing", "none"});
    const long samples = p.integer("samples");
    Csv csv({over, "constant"});
    std::vector<double> xs, cs;
    for (double v : p.list("values")) {
        GapSpec s = gap_spec(p);
        if (v != std::floor(v) || v < 1) throw config_error("key 'values': entries must be positive integers");
        (over == "m" ? s.m : s.R) = int(v);
        const auto sys = build_circle_denjoy(s);
        const Modulus mod = mod_name == "power" ? Modulus::power(p.positive("tau")) : Modulus::log_power(s.d, s.epsilon);
        double c = 0.0;
        for (int j = 0; j < s.d; ++j) c = std::max(c, holder_constant(sys, j, mod, samples, seed).constant);
        csv.row({v, c});
        xs.push_back(v);
        cs.push_back(c);
    }
    o.add("holder.csv", csv);
    o.plots.push_back({"holder.svg", "regularity constant against " + over, {{"constant", xs, cs}}, false});
    if (expect != "none") {
        bool ok = true;
        for (std::size_t i = 1; i < cs.size(); ++i) ok &= expect == "decreasing" ? cs[i] < cs[i - 1] : cs[i] > cs[i - 1];
        o.check("constant is " + expect + " in " + over, ok);
    }
}

inline void urn_exact(const Params& p, std::uint64_t, Outcome& o) {
    const int d = p.small("d", 1, 12), k = p.small("k", 0, 200);
    const auto a = exact_arrival_distribution(d, k);
    std::vector<std::string> header;
    for (int i = 1; i <= d; ++i) header.push_back("n" + std::to_string(i));
    header.push_back("probability");
    Csv csv(header);
    for (const auto& [s, prob] : a.probs) {
        std::vector<double> row(s.begin(), s.end());
        row.push_back(prob);
        csv.row(row);
    }
    o.add("arrival.csv", csv);
    o.note("states", double(a.probs.size()));
    o.note("exact", a.exact ? "1" : "0");
    o.note("max_deviation_from_uniform", a.max_deviation_from_uniform());
    o.check("uniform on the layer", a.max_deviation_from_uniform() < 1e-12, fmt(a.max_deviation_from_uniform()));
}

inline void urn_sample(const Params& p, std::uint64_t seed, Outcome& o) {
    const int d = p.small("d", 1, 12), len = p.small("length", 1, 200);
    const long paths = p.integer("paths");
    if (paths < 1) throw config_error("key 'paths' must be positive");
    std::map<std::vector<int>, long> counts;
    for (long t = 0; t < paths; ++t)
        ++counts[urn_endpoint(sample_word(WordLaw::urn(d), len, trial_seed(seed, std::uint64_t(t))))];
    const auto exact = exact_arrival_distribution(d, len);
    std::vector<std::string> header;
    for (int i = 1; i <= d; ++i) header.push_back("n" + std::to_string(i));
    for (const char* h : {"count", "empirical", "exact"}) header.push_back(h);
    Csv csv(header);
    double worst_z = 0.0;
    for (const auto& [s, prob] : exact.probs) {
        const long c = counts.count(s) ? counts[s] : 0;
        const double emp = double(c) / double(paths);
        std::vector<double> row(s.begin(), s.end());
        row.insert(row.end(), {double(c), emp, prob});
        csv.row(row);
        const double sd = std::sqrt(prob * (1 - prob) / double(paths));
        if (sd > 0) worst_z = std::max(worst_z, std::abs(emp - prob) / sd);
    }
    o.add("endpoints.csv", csv);
    const auto drift = diagonal_drift_check(d, std::min(paths, 1000L), len, seed);
    o.note("max_abs_z", worst_z);
    o.note("drift_frequency", drift.frequency);
    o.note("drift_sigma", drift.sigma);
    o.check("endpoint frequencies within 5 standard errors", worst_z <= 5.0, fmt(worst_z));
    o.check("steps toward a largest coordinate happen at rate >= 1/d", drift.ok, fmt(drift.frequency));
}

inline void ell_tau_experiment(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto system = p.choice("system", {"denjoy", "affine", "mobius"});
    const double tau = p.positive("tau");
    const long words = p.integer("words");
    const int len = p.small("length", 1);
    std::vector<Diffeo> gens;
    Interval I;
    WordLaw law = WordLaw::bernoulli({0.5, 0.5});
    std::optional<GapSystem> sys;
    if (system == "denjoy") {
        sys = build_circle_denjoy(gap_spec(p));
        gens = sys->generators();
        I = sys->base_gap().interval();
        law = WordLaw::urn(sys->spec().d);
        if (long(len) * sys->spec().d > sys->spec().R)
            throw config_error("key 'length': length * d exceeds the truncation radius R");
    } else {
        const auto c = build_spring_example(system == "affine" ? SpringKind::affine : SpringKind::mobius);
        gens = c.generators();
        I = c.I;
    }
    std::vector<KahanSum> mean(std::size_t(len) + 1);
    std::vector<double> worst(std::size_t(len) + 1, 0.0);
    for (long t = 0; t < words; ++t) {
        const auto w = sample_word(law, len, trial_seed(seed, std::uint64_t(t))).word;
        const auto s = ell_tau(gens, w, I, tau, std::size_t(len));
        for (std::size_t n = 0; n < s.size(); ++n) {
            mean[n].add(s[n] / double(words));
            worst[n] = std::max(worst[n], s[n]);
        }
    }
    Csv csv({"n", "mean", "max"});
    std::vector<double> ns, ms;
    for (std::size_t n = 0; n < mean.size(); ++n) {
        csv.row({double(n), mean[n].value(), worst[n]});
        ns.push_back(double(n));
        ms.push_back(mean[n].value());
    }
    o.add("ell_tau.csv", csv);
    o.plots.push_back({"ell_tau.svg", "mean partial sums", {{"mean", ns, ms}}, false});
    const double final_mean = mean.back().value();
    o.note("final_mean", final_mean);
    if (system == "denjoy") {
        const double bound = expectation_bound(sys->total_gap_mass(), tau, sys->spec().d);
        o.note("expectation_bound", bound);
        o.check("mean below the expectation bound", final_mean <= bound, fmt(final_mean) + " vs " + fmt(bound));
    } else if (system == "affine") {
        // every image has length 3^-n, whatever the word
        const double closed = (1.0 - std::pow(3.0, -tau * len)) * std::pow(1.0 / 3.0, tau) / (1.0 - std::pow(3.0, -tau));
        o.note("closed_form", closed);
        o.check("affine closed form", std::abs(final_mean - closed) < 1e-9, fmt(final_mean - closed));
    } else if (tau == 1.0) {
        o.check("disjoint images have total length at most 1", worst.back() <= 1.0, fmt(worst.back()));
    }
}

inline void schwartz_hunt(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sys = build_circle_denjoy(gap_spec(p));
    const double tau = p.positive("tau");
    const int len = p.small("length", 1);
    if (long(len) * sys.spec().d > sys.spec().R) throw config_error("key 'length': length * d exceeds R");
    const auto I = sys.base_gap().interval();
    double C = 0.0;
    for (int j = 0; j < sys.spec().d; ++j)
        C = std::max(C, holder_constant(sys, j, Modulus::power(tau), p.integer("samples"), seed).constant);
    C *= budget_safety;
    Csv csv({"trial", "M", "L", "ok", "hypothesis_ok", "first_violation", "max_log_ratio", "log_bound",
             "dropped_points"});
    const long words = p.integer("words");
    long passes = 0, hyp = 0;
    for (long t = 0; t < words; ++t) {
        const auto w = sample_word(WordLaw::urn(sys.spec().d), len, trial_seed(seed, std::uint64_t(t))).word;
        const double M = ell_tau(sys.generators(), w, I, tau, std::size_t(len)).back();
        const auto b = Budget::make(tau, C, M, I);
        const auto r = schwartz_control(sys.generators(), w, I, b);
        passes += r.ok;
        hyp += r.hypothesis_ok;
        csv.row({double(t), M, b.L, double(r.ok), double(r.hypothesis_ok), double(r.first_violation), r.max_log_ratio,
                 r.log_bound, double(r.dropped_points)});
    }
    o.add("control.csv", csv);
    const double frac_ok = words > 0 ? double(passes) / double(words) : 0.0;
    o.note("holder_constant", C);
    o.note("pass_fraction", frac_ok);
    o.check("series hypothesis holds on every word", hyp == words);
    o.check("control passes on at least min_pass_fraction of words", frac_ok >= p.num("min_pass_fraction"), fmt(frac_ok));
}

inline void spring_hunt(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto kind = p.choice("kind", {"affine", "mobius"});
    const auto c = build_spring_example(kind == "affine" ? SpringKind::affine : SpringKind::mobius);
    const auto health = check_spring(c);
    if (!health.ok()) throw assertion_failure("spring configuration: " + health.message);
    HuntConfig cfg;
    cfg.route = p.choice("route", {"holder", "c1"}) == "c1" ? HuntRoute::c1 : HuntRoute::holder;
    cfg.tau = p.positive("tau");
    cfg.eps = p.positive("eps");
    cfg.trials = p.integer("trials");
    cfg.max_len = std::size_t(p.small("max_len", 1));
    cfg.seed = seed;
    const auto res = hunt_hyperbolic(c, cfg);
    const auto lam = lambda_attractor(c, 10);
    const double tol = 3 * max_diameter(lam);
    Csv csv({"trial", "certified", "first_hit", "word_length", "fixed_point", "derivative", "residual", "rate",
             "member", "attractor_distance", "oracle_error"});
    long good = 0, oracle_bad = 0;
    for (const auto& t : res.trials) {
        std::vector<std::string> cells{fmt(double(t.trial)), t.cert ? "1" : "0", fmt(double(t.first_hit))};
        if (t.cert) {
            const auto& h = *t.cert;
            const double dist = distance_to_union(lam, h.fixed_point);
            double oracle = 0.0;
            if (kind == "affine") {
                oracle = std::max(std::abs(h.fixed_point - affine_address_fixed_point(h.word)),
                                  std::abs(h.derivative / std::pow(3.0, -double(h.word.size())) - 1.0));
                oracle_bad += oracle >= 1e-10;
            }
            good += h.derivative < 1 && h.residual < 1e-10 && dist <= tol;
            for (double v : {double(h.word.size()), h.fixed_point, h.derivative, h.residual, t.rate, double(t.member),
                             dist, oracle})
                cells.push_back(fmt(v));
        } else {
            cells.insert(cells.end(), {"", "", "", "", fmt(t.rate), fmt(double(t.member)), "", ""});
        }
        csv.raw(cells);
    }
    o.add("certificates.csv", csv);
    const double frac = cfg.trials > 0 ? double(good) / double(cfg.trials) : 0.0;
    o.note("certified", double(res.certified()));
    o.note("good_fraction", frac);
    o.note("budget_constant", res.C);
    if (kind == "affine") o.check("certificates match the address map", oracle_bad == 0, std::to_string(oracle_bad));
    if (cfg.route == HuntRoute::holder)
        o.check("good certificates reach min_fraction", frac >= p.num("min_fraction"), fmt(frac));
    else
        o.check("some member word is certified", res.certified() > 0);
}

inline void stationary_solve(const Params& p, std::uint64_t, Outcome& o) {
    const auto sc = scenario(p);
    const int G = p.small("grid", 16);
    const auto start = p.choice("start", {"lebesgue", "dirac"});
    const auto nu0 = start == "dirac" ? MeasureCDF::dirac(frac(p.num("dirac_at")), G) : MeasureCDF::lebesgue(G);
    const auto r = solve_stationary(sc.mu, nu0, p.positive("solve_tol"), p.integer("max_iter"), p.integer("polish"));
    Csv csv({"x", "cdf"});
    std::vector<double> xs, fs;
    const int stride = std::max(1, G / p.small("rows", 2, 1 << 20));
    for (int i = 0; i <= G; i += stride) {
        const double x = double(i) / G;
        csv.row({x, r.measure.cdf(x)});
        xs.push_back(x);
        fs.push_back(r.measure.cdf(x));
    }
    o.add("cdf.csv", csv);
    o.plots.push_back({"cdf.svg", "stationary CDF", {{"cdf", xs, fs}}, false});
    o.note("residual", r.residual);
    o.note("iterations", double(r.iterations));
    o.note("polish_steps", double(r.polish_steps));
    o.note("atom_mass", r.measure.atom_mass());
    if (sc.rotation) o.note("distance_to_lebesgue", sup_cdf_distance(r.measure, MeasureCDF::lebesgue(G)));
    o.check("converged", r.converged, fmt(r.residual));
}

inline void uniqueness(const Params& p, std::uint64_t, Outcome& o) {
    const auto sc = scenario(p);
    const int G = p.small("grid", 16);
    const auto u = check_uniqueness(sc.mu, MeasureCDF::lebesgue(G), MeasureCDF::dirac(frac(p.num("dirac_at")), G),
                                    p.positive("tol"), p.positive("solve_tol"), p.integer("max_iter"),
                                    p.integer("polish"));
    Csv csv({"x", "cdf_lebesgue_start", "cdf_dirac_start"});
    const int stride = std::max(1, G / p.small("rows", 2, 1 << 20));
    for (int i = 0; i <= G; i += stride) {
        const double x = double(i) / G;
        csv.row({x, u.a.measure.cdf(x), u.b.measure.cdf(x)});
    }
    o.add("cdfs.csv", csv);
    o.note("distance", u.distance);
    o.note("residual_lebesgue_start", u.a.residual);
    o.note("residual_dirac_start", u.b.residual);
    o.check("both solves converged", u.conclusive);
    o.check("limits agree within tol", u.unique, fmt(u.distance));
}

inline void collapse(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sc = scenario(p);
    const auto nu = stationary_measure(sc.mu, p);
    const auto r = dirac_collapse(sc.mu, nu, p.integer("words"), p.integer("length"), p.positive("eps"), seed);
    Csv csv({"n", "median_max_arc_mass"});
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) csv.row({double(r.checkpoints[i]), r.median_max_mass[i]});
    o.add("collapse.csv", csv);
    Csv per({"word", "final_arc_length"});
    for (std::size_t i = 0; i < r.final_length.size(); ++i) per.row({double(i), r.final_length[i]});
    o.add("final_arcs.csv", per);
    o.plots.push_back({"collapse.svg", "median eps-arc mass", {{"median", as_doubles(r.checkpoints), r.median_max_mass}}, false});
    o.note("fraction", r.fraction);
    o.check("collapsed fraction reaches min_fraction", r.fraction >= p.num("min_fraction"), fmt(r.fraction));
}

inline void contraction_trace(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sc = scenario(p);
    const int G = p.small("grid", 16);
    const auto s = contraction_along_words(sc.mu, p.integer("words"), p.integer("length"), seed, G);
    Csv csv({"n", "median_c", "q90_c"});
    for (std::size_t i = 0; i < s.checkpoints.size(); ++i) csv.row({double(s.checkpoints[i]), s.median[i], s.q90[i]});
    o.add("contraction.csv", csv);
    o.plots.push_back({"contraction.svg", "contraction coefficient",
                       {{"median", as_doubles(s.checkpoints), s.median}, {"q90", as_doubles(s.checkpoints), s.q90}}, true});
    o.note("final_median", s.median.back());
    if (sc.rotation) {
        double worst = 0.0;
        for (double m : s.median) worst = std::max(worst, std::abs(m - 0.5));
        o.check("rotations keep c = 1/2", worst <= 1.0 / G + 1e-15, fmt(worst));
    } else {
        o.check("medians do not increase", s.nonincreasing);
        o.check("final median below max_final_median", s.median.back() < p.num("max_final_median"), fmt(s.median.back()));
    }
}

inline void lyapunov(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sc = scenario(p);
    const auto nu = sc.rotation ? MeasureCDF::lebesgue(p.small("grid", 16)) : stationary_measure(sc.mu, p);
    const auto r = lyapunov_exponent(sc.mu, nu, p.integer("words"), p.integer("length"), seed);
    Csv csv({"quadrature", "quadrature_error", "birkhoff_mean", "birkhoff_se", "ci99_lo", "ci99_hi", "agree"});
    csv.row({r.quadrature, r.quadrature_error, r.birkhoff_mean, r.birkhoff_se, r.ci99_lo(), r.ci99_hi(), double(r.agree)});
    o.add("lyapunov.csv", csv);
    if (sc.rotation) {
        o.check("quadrature is exactly 0", r.quadrature == 0.0, fmt(r.quadrature));
        o.check("Birkhoff mean within 2 standard errors of 0", std::abs(r.birkhoff_mean) <= 2 * r.birkhoff_se,
                fmt(r.birkhoff_mean));
    } else {
        o.check("99% interval below 0", r.ci99_hi() < 0, fmt(r.ci99_hi()));
        o.check("quadrature and Birkhoff agree", r.agree, fmt(r.quadrature) + " vs " + fmt(r.birkhoff_mean));
    }
}

inline void escape(const Params& p, std::uint64_t seed, Outcome& o) {
    const int G = p.small("grid", 16);
    const auto r = interval_escape(interval_escape_pair(), MeasureCDF::dirac(p.num("start"), G, false),
                                   p.integer("iters"), p.positive("delta"));
    const long stride = std::max(1L, p.integer("stride"));
    Csv csv({"step", "middle_mass"});
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < r.trace.size(); n += std::size_t(stride)) {
        csv.row({double(n), r.trace[n]});
        xs.push_back(double(n));
        ys.push_back(r.trace[n]);
    }
    o.add("escape.csv", csv);
    o.plots.push_back({"escape.svg", "mass away from the endpoints", {{"middle", xs, ys}}, true});
    o.note("final_middle_mass", r.final_mass);
    o.note("left_mass", r.left_mass);
    o.note("right_mass", r.right_mass);
    o.check("middle mass below threshold", r.final_mass < p.num("threshold"), fmt(r.final_mass));

    const long probes = p.integer("probes");
    Rng rng = Rng::substream(seed, 1);
    long bad = 0;
    for (long k = 0; k < probes; ++k) {
        const double c = -0.9 + 4 * rng.uniform(), t = rng.uniform();
        const auto g = mobius_interval({1 + c, 0.0, c, 1.0});
        const auto s = symmetry_integral_check(g, t);
        bad += !s.holds || s.equality != (std::abs(g(t) - t) < 1e-9);
    }
    o.note("symmetry_probe_failures", double(bad));
    o.check("symmetry integral inequality on random probes", bad == 0, std::to_string(bad));
}

inline void conjugate(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sc = scenario(p);
    const auto nu = sc.rotation ? MeasureCDF::lebesgue(p.small("grid", 16)) : stationary_measure(sc.mu, p);
    const int K = p.small("nodes", 8, 1 << 16);
    const auto r = conjugate_by_cdf(sc.mu, nu, K);
    Csv csv({"generator", "weight", "lipschitz", "bound"});
    for (std::size_t k = 0; k < sc.mu.size(); ++k) {
        const double b = std::isfinite(r.bound[k]) ? r.bound[k] : -1.0;  // -1: inverse outside the support
        csv.row({double(k), sc.mu.weights[k], r.lipschitz[k], b});
    }
    o.add("lipschitz.csv", csv);
    std::vector<std::string> header{"x"};
    for (std::size_t k = 0; k < sc.mu.size(); ++k) header.push_back("g" + std::to_string(k));
    Csv maps(header);
    for (int i = 0; i <= K; ++i) {
        std::vector<double> row{double(i) / K};
        for (const auto& g : r.conjugated.generators) row.push_back(g.lift(double(i) / K));
        maps.row(row);
    }
    o.add("conjugated.csv", maps);
    const auto lip = lip_inequality_check(sc.mu, nu, p.integer("arcs"), 1e-9, seed);
    o.note("inequality_checks", double(lip.checks));
    o.note("inequality_violations", double(lip.violations));
    o.check("Lipschitz constants within 1.01 of the bound", r.ok);
    o.check("arc inequality", lip.violations == 0, fmt(lip.worst));
}

inline void kopell(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto f = kopell_map(p);
    const auto r = kopell_check(f, p.num("b"), p.integer("trials"), p.small("n_max", 1), seed);
    Csv csv({"M", "max_log_ratio", "trials", "violations"});
    csv.row({r.M, r.max_log_ratio, double(r.trials), double(r.violations)});
    o.add("kopell.csv", csv);
    o.check("ratio bound exp(M) holds", r.ok(), std::to_string(r.violations));
}

inline void cano(const Params& p, std::uint64_t, Outcome& o) {
    const auto f = kopell_map(p);
    const Interval J{p.num("lo"), p.num("hi")};
    if (!(0 < J.lo && J.lo < J.hi && J.hi <= 1)) throw config_error("keys 'lo', 'hi': need 0 < lo < hi <= 1");
    const auto r = cano_series(f, J, p.positive("tau"), p.small("n_max", 1));
    Csv csv({"n", "partial_sum"});
    for (std::size_t n = 0; n < r.partial_sums.size(); ++n) csv.row({double(n), r.partial_sums[n]});
    o.add("cano.csv", csv);
    o.note("exponent", r.exponent);
    o.note("bounded_regime", r.bounded_regime ? "1" : "0");
    bool mono = true;
    for (std::size_t n = 1; n < r.partial_sums.size(); ++n) mono &= r.partial_sums[n] >= r.partial_sums[n - 1];
    o.check("iterates contract", r.contracting);
    o.check("partial sums are nondecreasing", mono);
}

inline void tangente(const Params& p, std::uint64_t seed, Outcome& o) {
    const auto sys = build_circle_denjoy(gap_spec(p));
    const int n_max = p.small("n_max", 1);
    const auto seq = min_gap_sequence(sys, n_max);
    double C = 0.0;
    const double tau = 1.0 / sys.spec().d;
    for (int j = 0; j < sys.spec().d; ++j)
        C = std::max(C, holder_constant(sys, j, Modulus::power(tau), p.integer("samples"), seed).constant);
    const auto rep = check_tangente_recursion(seq, C, sys.spec().d);
    Csv csv({"n", "min_gap", "power_floor"});
    for (std::size_t n = 0; n < seq.size(); ++n)
        csv.row({double(n), seq[n], n == 0 ? rep.A : rep.A / std::pow(double(n), sys.spec().d)});
    o.add("min_gaps.csv", csv);
    o.note("holder_constant", C);
    o.note("A", rep.A);
    o.check("step recursion holds", rep.step_failures.empty(), std::to_string(rep.step_failures.size()));
    o.check("power floor holds", rep.power_failures.empty(), std::to_string(rep.power_failures.size()));
}

}  // namespace lab

inline const std::vector<Experiment>& experiments() {
    using namespace lab;
    static const std::vector<Experiment> all = {
        {"denjoy-build", "circle system of commuting C1 diffeomorphisms with wandering gaps",
         with(gap_keys(), {{"samples", "1000", "points sampled for the health checks"}}), denjoy_build},
        {"pixton-build", "interval system of commuting diffeomorphisms", gap_keys("30", "0.2"), pixton_build},
        {"holder-scan", "regularity constant of the circle system along a parameter sweep",
         with(gap_keys("200", "0"),
              {{"over", "m", "swept parameter: m | R"},
               {"values", "4;16;64", "';'-separated values of the swept parameter"},
               {"modulus", "log_power", "log_power | power"},
               {"tau", "0.5", "exponent of the power modulus"},
               {"samples", "2000", "random pairs per generator"},
               {"expect", "decreasing", "trend to assert: decreasing | increasing | none"}}),
         holder_scan},
        {"urn-exact", "exact arrival law of the urn walk on the layer n1+...+nd = k",
         {{"d", "2", "dimension"}, {"k", "10", "number of steps"}}, urn_exact},
        {"urn-sample", "sampled urn endpoints against the exact law",
         {{"d", "2", "dimension"}, {"length", "10", "steps per path"}, {"paths", "20000", "sampled paths"}}, urn_sample},
        {"ell-tau", "partial sums of |h_n(I)|^tau along random words",
         with(gap_keys(),
              {{"system", "denjoy", "denjoy | affine | mobius"},
               {"tau", "0.6", "exponent"},
               {"words", "1000", "sampled words"},
               {"length", "100", "word length"}}),
         ell_tau_experiment},
        {"schwartz-hunt", "distortion control of the base gap along urn words",
         with(gap_keys("120", "0"),
              {{"tau", "0.6", "Holder exponent of the derivative"},
               {"words", "20", "sampled words"},
               {"length", "60", "word length, at most R/d"},
               {"samples", "4000", "random pairs for the Holder constant"},
               {"min_pass_fraction", "0.8", "asserted fraction of controlled words"}}),
         schwartz_hunt},
        {"spring-hunt", "hyperbolic fixed points of random products on a spring pair",
         {{"kind", "affine", "affine | mobius"},
          {"route", "holder", "holder | c1"},
          {"tau", "1", "holder route exponent"},
          {"eps", "0.25", "c1 route margin"},
          {"trials", "100", "random words"},
          {"max_len", "200", "longest product"},
          {"min_fraction", "0.99", "asserted fraction of good certificates (holder route)"}},
         spring_hunt},
        {"stationary-solve", "stationary measure by Cesaro averages of the diffusion",
         with({scenario_key(),
               {"start", "lebesgue", "lebesgue | dirac"},
               {"dirac_at", "0.3", "atom position for start=dirac"},
               {"rows", "256", "CDF rows written"}},
              solve_keys()),
         stationary_solve},
        {"uniqueness", "stationary limits from a Lebesgue and a point-mass start",
         with({scenario_key(), {"dirac_at", "0.3", "atom position"}, {"tol", "1e-3", "asserted sup-CDF distance"},
               {"rows", "256", "CDF rows written"}},
              solve_keys()),
         uniqueness},
        {"dirac-collapse", "stationary measure pushed by random products gathers in short arcs",
         with({scenario_key(),
               {"words", "1000", "sampled words"},
               {"length", "100", "product length"},
               {"eps", "0.05", "arc length and mass defect"},
               {"min_fraction", "0.95", "asserted collapsed fraction"}},
              solve_keys()),
         collapse},
        {"contraction-trace", "contraction coefficient of random products",
         {scenario_key(),
          {"words", "1000", "sampled words"},
          {"length", "100", "product length"},
          {"grid", std::to_string(default_grid), "arc grid"},
          {"max_final_median", "0.05", "asserted bound on the last median"}},
         contraction_trace},
        {"lyapunov", "Lyapunov exponent by quadrature and by Birkhoff sums",
         with({scenario_key(), {"words", "1000", "Birkhoff paths"}, {"length", "1000", "steps per path"}}, solve_keys()),
         lyapunov},
        {"interval-escape", "symmetric random walk of x/(2-x) and its inverse on [0,1]",
         {{"grid", std::to_string(default_grid), "CDF grid cells"},
          {"start", "0.5", "initial atom"},
          {"iters", "10000", "diffusion steps"},
          {"delta", "0.05", "width of the endpoint zones"},
          {"threshold", "0.1", "asserted final middle mass"},
          {"stride", "10", "trace rows every stride steps"},
          {"probes", "1000", "random symmetry-integral probes"}},
         escape},
        {"conjugate-cdf", "generators conjugated by the CDF of the stationary measure",
         with({scenario_key(), {"nodes", "256", "nodes of the conjugated maps"}, {"arcs", "1000", "random arcs per generator"}},
              solve_keys()),
         conjugate},
        {"kopell-check", "distortion of iterates of x/(c-x) on a fundamental domain",
         {{"c", "4", "map x/(c-x)"}, {"b", "0.9", "right end of the fundamental domain"}, {"trials", "1000", "random triples"},
          {"n_max", "50", "largest iterate"}},
         kopell},
        {"cano-check", "series of |f^n(J)|^(tau(1+tau)) for x/(c-x)",
         {{"c", "4", "map x/(c-x)"}, {"lo", "0.5", "left end of J"}, {"hi", "0.6", "right end of J"}, {"tau", "0.618033988749895", "exponent"},
          {"n_max", "200", "terms"}},
         cano},
        {"tangente-check", "recursion and power floor of the smallest gaps",
         with(gap_keys("30", "0.2"), {{"n_max", "25", "depth"}, {"samples", "2000", "random pairs for the Holder constant"}}),
         tangente},
    };
    return all;
}

inline const Experiment& find_experiment(const std::string& name) {
    for (const auto& e : experiments())
        if (e.name == name) return e;
    throw config_error("unknown experiment '" + name + "'");
}

inline std::pair<std::string, std::string> parse_assignment(const std::string& s, const std::string& where) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw config_error(where + ": expected key=value, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

// key=value lines; blank lines and '#' comments are skipped.
inline std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    int line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(parse_assignment(line.substr(first), "config line " + std::to_string(line_no)));
    }
    return out;
}

struct RunResult {
    int status = 0;
    Outcome outcome;
    std::string message;
};

inline constexpr int exit_ok = 0, exit_assertion = 2, exit_config = 3, exit_internal = 4;

// Resolves parameters, runs, and writes artifacts, plots and the manifest to `out`.
inline RunResult run_experiment(const std::string& name, const std::vector<std::pair<std::string, std::string>>& settings,
                                std::uint64_t seed, const std::filesystem::path& out, bool plots) {
    RunResult rr;
    std::optional<Params> params;
    try {
        const auto& e = find_experiment(name);
        params.emplace(e.keys);
        for (const auto& [k, v] : settings) params->set(k, v);
        e.run(*params, seed, rr.outcome);
        rr.status = rr.outcome.ok() ? exit_ok : exit_assertion;
        for (const auto& c : rr.outcome.checks)
            if (!c.ok) {
                rr.message = "check failed: " + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
                break;
            }
    } catch (const config_error& ex) {
        rr.status = exit_config;
        rr.message = std::string("configuration error: ") + ex.what();
        return rr;
    } catch (const domain_error& ex) {
        rr.status = exit_config;
        rr.message = std::string("configuration error: ") + ex.what();
        return rr;
    } catch (const assertion_failure& ex) {
        rr.status = exit_assertion;
        rr.message = std::string("check failed: ") + ex.what();
    } catch (const precondition_error& ex) {
        rr.status = exit_assertion;
        rr.message = std::string("check failed: ") + ex.what();
    } catch (const truncation_error& ex) {
        rr.status = exit_assertion;
        rr.message = std::string("check failed: ") + ex.what();
    } catch (const std::exception& ex) {
        rr.status = exit_internal;
        rr.message = std::string("internal error: ") + ex.what();
    }

    auto& o = rr.outcome;
    if (!o.summary.empty()) o.add("summary.csv", lab::summary_csv(o));
    std::ostringstream man;
    man << "experiment=" << name << "\nseed=" << seed << "\n";
    for (const auto& k : params->keys()) man << k.name << "=" << k.value << "\n";
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    man << "# generated " << stamp << "\n";
    man << "# status " << rr.status << (rr.message.empty() ? "" : " " + rr.message) << "\n";
    for (const auto& c : o.checks) man << "# check " << (c.ok ? "PASS " : "FAIL ") << c.name << "\n";
    for (const auto& [file, bytes] : o.artifacts) {
        write_file(out / file, bytes);
        man << "# artifact " << file << " fnv1a=" << hex64(fnv1a(bytes)) << "\n";
    }
    if (plots)
        for (const auto& pl : o.plots) {
            const auto svg = svg_plot(pl.title, pl.series, pl.log_y);
            write_file(out / pl.file, svg);
            man << "# plot " << pl.file << " fnv1a=" << hex64(fnv1a(svg)) << "\n";
        }
    write_file(out / "manifest.txt", man.str());
    return rr;
}

}  // namespace denjoy
