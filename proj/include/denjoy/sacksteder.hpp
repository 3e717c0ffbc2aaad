#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "denjoy/distortion.hpp"
#include "denjoy/maps.hpp"
#include "denjoy/walks.hpp"

namespace denjoy {

// Two maps of [a, d]: f fixes a with image [a, b], g fixes d with image [c, d], b < c.
// The open interval (b, c) wanders under the pseudo-group they generate.
struct SpringConfig {
    std::string kind;
    Interval ambient{0.0, 1.0};
    Diffeo f, g;
    Interval I;  // (b, c)

    std::vector<Diffeo> generators() const { return {f, g}; }
};

struct SpringCheck {
    bool endpoints_ok = false;
    bool ping_pong_ok = false;
    std::string message;
    bool ok() const { return endpoints_ok && ping_pong_ok; }
};

enum class SpringKind { affine, mobius };

// `corrupt` flips one sign in the Mobius f; it exists so the acceptance harness can prove it fails.
inline SpringConfig build_spring_example(SpringKind kind, bool corrupt = false) {
    SpringConfig c;
    c.ambient = {0.0, 1.0};
    c.I = {1.0 / 3.0, 2.0 / 3.0};
    if (kind == SpringKind::affine) {
        c.kind = "affine";
        c.f = affine(1.0 / 3.0, 0.0);
        c.g = affine(1.0 / 3.0, 2.0 / 3.0);
    } else {
        c.kind = "mobius";
        c.f = mobius_interval({1.0, 0.0, corrupt ? 1.0 : -1.0, 4.0});  // x / (4 - x)
        c.g = mobius_interval({-1.0, 2.0, -2.0, 3.0});                 // (2 - x) / (3 - 2x)
    }
    return c;
}

// Images of [a, d] under all words of a given length, sorted.
inline std::vector<Interval> lambda_attractor(const SpringConfig& c, int depth) {
    if (depth < 0 || depth > 20) throw config_error("lambda_attractor: depth must lie in [0, 20]");
    std::vector<Interval> layer{c.ambient};
    for (int k = 0; k < depth; ++k) {
        std::vector<Interval> next;
        next.reserve(layer.size() * 2);
        // outermost letter last: w = h o u, so images of cylinders nest
        for (const auto& J : layer)
            for (const Diffeo* h : {&c.f, &c.g}) next.push_back({(*h)(J.lo), (*h)(J.hi)});
        layer = std::move(next);
    }
    std::sort(layer.begin(), layer.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return layer;
}

inline double max_diameter(const std::vector<Interval>& v) {
    double m = 0.0;
    for (const auto& J : v) m = std::max(m, J.length());
    return m;
}

inline double distance_to_union(const std::vector<Interval>& v, double x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& J : v) {
        if (J.lo <= x && x <= J.hi) return 0.0;
        best = std::min(best, std::min(std::abs(x - J.lo), std::abs(x - J.hi)));
    }
    return best;
}

inline SpringCheck check_spring(const SpringConfig& c, int depth = 6) {
    SpringCheck r;
    const double a = c.ambient.lo, d = c.ambient.hi, b = c.I.lo, cc = c.I.hi;
    r.endpoints_ok = std::abs(c.f(a) - a) < 1e-12 && std::abs(c.f(d) - b) < 1e-12 && std::abs(c.g(a) - cc) < 1e-12 &&
                     std::abs(c.g(d) - d) < 1e-12 && b < cc;
    if (!r.endpoints_ok) r.message = "spring endpoints: need f(a)=a, f(d)=b, g(a)=c, g(d)=d with b<c";
    r.ping_pong_ok = true;
    for (int k = 1; k <= depth && r.ping_pong_ok; ++k) {
        const auto v = lambda_attractor(c, k);
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i - 1].hi < v[i].lo)) {
                r.ping_pong_ok = false;
                r.message = "ping-pong: images overlap at depth " + std::to_string(k);
                break;
            }
    }
    return r;
}

struct GapSeries {
    std::vector<double> partial_sums;  // sum_{k<=n} 2^k |h_k(I)|
    bool floor_reached = false;        // increment fell below 1e-15
    long floor_step = -1;
};

inline GapSeries sum_2n_gap(const SpringConfig& c, const std::vector<int>& w, std::size_t n_max) {
    GapSeries r;
    const auto gens = c.generators();
    IntervalOrbit img(c.I);
    KahanSum s;
    for (std::size_t n = 0; n <= std::min(n_max, w.size()); ++n) {
        if (n > 0) img.push(gens[std::size_t(w[n - 1])]);
        const double inc = std::exp(double(n) * std::log(2.0) + img.log_length());
        s.add(inc);
        r.partial_sums.push_back(s.value());
        if (!r.floor_reached && inc < 1e-15) {
            r.floor_reached = true;
            r.floor_step = long(n);
        }
    }
    return r;
}

struct Membership {
    bool member = true;
    long first_violation = -1;
};

// |h_n(I)| <= B / (2 - eps)^n along the word.
inline Membership omega_B_eps_membership(const SpringConfig& c, const std::vector<int>& w, double B, double eps) {
    if (!(eps > 0 && eps < 1)) throw domain_error("omega_B_eps_membership: eps must lie in (0,1)");
    Membership r;
    const auto gens = c.generators();
    IntervalOrbit img(c.I);
    const double logB = std::log(B), rate = std::log(2 - eps);
    for (std::size_t n = 0; n <= w.size(); ++n) {
        if (n > 0) img.push(gens[std::size_t(w[n - 1])]);
        if (img.log_length() > logB - double(n) * rate + 1e-12) {
            r.member = false;
            r.first_violation = long(n);
            break;
        }
    }
    return r;
}

enum class HuntRoute { holder, c1 };

struct HuntConfig {
    HuntRoute route = HuntRoute::holder;
    double tau = 1.0;   // holder route
    double eps = 0.25;  // c1 route
    long trials = 1000;
    std::size_t max_len = 200;
    std::uint64_t seed = 1;
};

struct TrialRecord {
    long trial = 0;
    long first_hit = -1;  // step of the first certificate, -1 if none
    long events = 0;      // steps where the image landed in the neighbourhood
    double rate = 0.0;    // log |h_n(I)| / n at the hit (or at max_len)
    bool member = true;   // c1 route: word satisfies the derivative envelope
    std::optional<HyperbolicCertificate> cert;
};

struct HuntResult {
    std::vector<TrialRecord> trials;
    double C = 0.0;  // holder route: safety-scaled constant; c1 route: C_bar
    std::optional<C1Budget> c1;
    long certified() const {
        long n = 0;
        for (const auto& t : trials) n += t.cert.has_value();
        return n;
    }
};

inline double spring_log_deriv_constant(const SpringConfig& c, double tau) {
    return budget_safety * std::max(log_deriv_holder_constant(c.f, tau, c.ambient, 4000).constant,
                                    log_deriv_holder_constant(c.g, tau, c.ambient, 4000).constant);
}

namespace detail {

// Certificate for h_n when h_n(I) sits in the L-neighbourhood on one side of I.
inline std::optional<HyperbolicCertificate> certify_side(const std::vector<Diffeo>& gens, const std::vector<int>& w,
                                                         std::size_t n, const Interval& I, const Interval& img,
                                                         double L) {
    Side side;
    Interval J;
    if (img.hi <= I.lo && img.lo >= I.lo - L) {
        side = Side::left;
        J = {std::max(0.0, I.lo - 2 * L), I.lo};
    } else if (img.lo >= I.hi && img.hi <= I.hi + L) {
        side = Side::right;
        J = {I.hi, std::min(1.0, I.hi + 2 * L)};
    } else {
        return std::nullopt;
    }
    const Diffeo h = word_map(gens, w, n);
    auto cert = detect_hyperbolic_fixed_point(h, J);
    if (cert) {
        cert->side = side;
        cert->word.assign(w.begin(), w.begin() + long(n));
    }
    return cert;
}

}  // namespace detail

// Samples Bernoulli(1/2,1/2) words and looks for the first step at which the distortion
// budget forces a hyperbolic fixed point near the wandering interval.
inline HuntResult hunt_hyperbolic(const SpringConfig& c, const HuntConfig& cfg) {
    HuntResult out;
    const auto gens = c.generators();
    const auto law = WordLaw::bernoulli({0.5, 0.5});
    const auto xs = linspace(c.I.lo, c.I.hi, 17);
    if (cfg.route == HuntRoute::holder) {
        out.C = spring_log_deriv_constant(c, cfg.tau);
    } else {
        out.c1 = c1_budget(c.f, c.g, c.I, 1.0, cfg.eps);
        out.C = out.c1->C_bar;
    }
    for (long t = 0; t < cfg.trials; ++t) {
        TrialRecord rec;
        rec.trial = t;
        const auto w = sample_word(law, long(cfg.max_len), trial_seed(cfg.seed, std::uint64_t(t))).word;
        IntervalOrbit img(c.I);
        double logC = 0.0, L = 0.0;
        if (cfg.route == HuntRoute::c1) {
            const double logB = word_log_B(gens, w, c.I, cfg.eps);
            logC = std::max(0.0, logB + std::log(out.C));
            rec.member = check_envelope(gens, w, xs, logC, 2 - 2 * cfg.eps).ok;
            L = std::min(out.c1->eps1 / (2 * std::exp(logC)), c.I.length() / 2);
        }
        KahanSum series;
        for (std::size_t n = 1; n <= w.size(); ++n) {
            series.add(std::pow(img.length(), cfg.tau));
            img.push(gens[std::size_t(w[n - 1])]);
            bool eligible;
            if (cfg.route == HuntRoute::holder) {
                L = Budget::make(cfg.tau, out.C, series.value(), c.I).L;
                eligible = true;
            } else {
                eligible = rec.member && double(n) * std::log(2 - 3 * cfg.eps) > logC;
            }
            const Interval J = img.interval();
            const bool near = (J.hi <= c.I.lo && J.lo >= c.I.lo - L) || (J.lo >= c.I.hi && J.hi <= c.I.hi + L);
            if (!near) continue;
            ++rec.events;
            if (!eligible || rec.cert) continue;
            rec.cert = detail::certify_side(gens, w, n, c.I, J, L);
            if (rec.cert) {
                rec.first_hit = long(n);
                rec.rate = img.log_length() / double(n);
            }
        }
        if (!rec.cert) rec.rate = img.log_length() / double(w.size());
        out.trials.push_back(std::move(rec));
    }
    return out;
}

// Affine oracle: the fixed point of the composite of the middle-thirds maps along w.
inline double affine_address_fixed_point(const std::vector<int>& w) {
    // h(x) = 3^-n x + c with c = h(0)
    double c = 0.0, slope = 1.0;
    for (int g : w) {
        c = c / 3.0 + (g == 1 ? 2.0 / 3.0 : 0.0);
        slope /= 3.0;
    }
    return c / (1.0 - slope);
}

}  // namespace denjoy
