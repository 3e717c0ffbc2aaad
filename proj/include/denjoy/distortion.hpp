#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "denjoy/constructions.hpp"
#include "denjoy/maps.hpp"
#include "denjoy/numeric.hpp"
#include "denjoy/walks.hpp"

namespace denjoy {

// h_n for a word in application order (word[0] applied first), truncated to its first n letters.
inline Diffeo word_map(const std::vector<Diffeo>& gens, const std::vector<int>& w, std::size_t n) {
    if (n == 0) {
        const Diffeo& g = gens.front();
        return g.is_circle() ? identity_circle() : affine(1.0, 0.0, g.domain());
    }
    std::vector<Letter> letters;
    letters.reserve(n);
    for (std::size_t k = n; k-- > 0;) letters.push_back({gens.at(std::size_t(w[k])), 1});
    return word(std::move(letters));
}
inline Diffeo word_map(const std::vector<Diffeo>& gens, const std::vector<int>& w) {
    return word_map(gens, w, w.size());
}

// Pushes an interval through a sequence of maps keeping its length accurate when it becomes
// much smaller than the spacing of doubles near its position: below that scale the new length
// is the integral of the derivative (Gauss-Legendre), not a difference of endpoints.
class IntervalOrbit {
public:
    IntervalOrbit(double lo, double len) : lo_(lo), len_(len), log_len_(std::log(len)) {}
    explicit IntervalOrbit(const Interval& I) : IntervalOrbit(I.lo, I.length()) {}

    double lo() const { return lo_; }
    double hi() const { return lo_ + len_; }
    double length() const { return len_; }
    // stays finite after the length underflows
    double log_length() const { return log_len_; }
    Interval interval() const { return {lo_, lo_ + len_}; }

    // The new length is either the difference of the endpoint images or the integral of g'
    // over the interval; each step keeps whichever has the smaller estimated relative error.
    void push(const Diffeo& g) {
        const double a = g.is_circle() ? g.lift(lo_) : g(lo_);
        const double whole = mean_deriv(g, lo_, len_);
        const double halves = 0.5 * (mean_deriv(g, lo_, 0.5 * len_) + mean_deriv(g, lo_ + 0.5 * len_, 0.5 * len_));
        const double quad_err = std::abs(whole - halves) / halves;
        bool use_ends = false;
        double b = 0.0;
        if (len_ > 1e-300) {
            b = g.is_circle() ? g.lift(lo_ + len_) : g(std::min(lo_ + len_, g.domain().hi));
            const double ends_err =
                4 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), 1.0}) / (b - a);
            use_ends = b > a && ends_err < quad_err;
        }
        if (use_ends) {
            len_ = b - a;
            log_len_ = std::log(len_);
        } else {
            log_len_ += std::log(halves);
            len_ = std::exp(log_len_);
        }
        lo_ = g.is_circle() ? a - std::floor(a) : a;
    }

private:
    static double mean_deriv(const Diffeo& g, double lo, double len) {
        static constexpr std::array<double, 5> node{0.0, -0.5384693101056831, 0.5384693101056831,
                                                    -0.9061798459386640, 0.9061798459386640};
        static constexpr std::array<double, 5> weight{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                      0.2369268850561891, 0.2369268850561891};
        double s = 0.0;
        for (std::size_t i = 0; i < 5; ++i) s += weight[i] * g.deriv(lo + 0.5 * len * (1.0 + node[i]));
        return 0.5 * s;
    }

    double lo_, len_, log_len_;
};

// Points carried along a word together with log h_n'(x). With `drop_unrealized`, a point whose
// image leaves a truncated gap catalog is dropped instead of aborting the whole orbit.
class PointOrbit {
public:
    explicit PointOrbit(std::vector<double> xs, bool drop_unrealized = false)
        : x_(std::move(xs)), logd_(x_.size(), 0.0), alive_(x_.size(), true), drop_(drop_unrealized) {}
    void push(const Diffeo& g) {
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (!alive_[i]) continue;
            try {
                const double d = g.deriv(x_[i]);
                if (!(d > 0)) throw domain_error("nonpositive derivative along a word (broken map?)");
                const double y = g.is_circle() ? frac(g(x_[i])) : g(x_[i]);
                logd_[i] += std::log(d);
                x_[i] = y;
            } catch (const truncation_error&) {
                if (!drop_) throw;
                alive_[i] = false;
                ++dropped_;
            }
        }
    }
    const std::vector<double>& points() const { return x_; }
    const std::vector<double>& log_derivs() const { return logd_; }
    bool alive(std::size_t i) const { return alive_[i]; }
    long dropped() const { return dropped_; }
    double max_log() const {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x_.size(); ++i)
            if (alive_[i]) m = std::max(m, logd_[i]);
        return m;
    }
    double min_log() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x_.size(); ++i)
            if (alive_[i]) m = std::min(m, logd_[i]);
        return m;
    }
    // length of the image of the hull of the surviving points
    double alive_span(bool circle) const {
        std::size_t a = x_.size(), b = 0;
        for (std::size_t i = 0; i < x_.size(); ++i)
            if (alive_[i]) a = std::min(a, i), b = i;
        if (a >= b) return 0.0;
        return circle ? frac(x_[b] - x_[a]) : x_[b] - x_[a];
    }

private:
    std::vector<double> x_, logd_;
    std::vector<bool> alive_;
    bool drop_ = false;
    long dropped_ = 0;
};

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[std::size_t(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

// Partial sums S_n = sum_{k<=n} |h_k(I)|^tau for n = 0..n_max.
inline std::vector<double> ell_tau(const std::vector<Diffeo>& gens, const std::vector<int>& w, const Interval& I,
                                   double tau, std::size_t n_max) {
    if (w.size() < n_max) throw precondition_error("ell_tau: word shorter than n_max");
    std::vector<double> sums;
    sums.reserve(n_max + 1);
    IntervalOrbit orbit(I);
    KahanSum s;
    s.add(std::pow(orbit.length(), tau));
    sums.push_back(s.value());
    for (std::size_t n = 1; n <= n_max; ++n) {
        try {
            orbit.push(gens.at(std::size_t(w[n - 1])));
        } catch (const truncation_error& e) {
            throw truncation_error(std::string("ell_tau: ") + e.what(), long(n) - 1);
        }
        s.add(std::pow(orbit.length(), tau));
        sums.push_back(s.value());
    }
    return sums;
}

// Bound on the mean of the tau-series along urn words whose images are disjoint gaps
// of total mass `mass`: mass^tau * [sum_k C(k+d-1,d-1)^(-tau/(1-tau))]^(1-tau), infinite
// for tau <= 1/d. For d = 2 the bracket is zeta(tau/(1-tau)).
inline double expectation_bound(double mass, double tau, int d) {
    if (!(tau > 0 && tau <= 1)) throw domain_error("expectation_bound: tau must lie in (0,1]");
    if (d < 1) throw domain_error("expectation_bound: d must be positive");
    if (tau == 1.0) return mass;
    if (tau * d <= 1.0) return std::numeric_limits<double>::infinity();
    const double p = tau / (1.0 - tau);
    auto term = [&](double k) {
        double logc = 0.0;
        for (int j = 1; j < d; ++j) logc += std::log((k + j) / j);
        return std::exp(-p * logc);
    };
    const long K = 20000;
    KahanSum s;
    for (long k = 0; k < K; ++k) s.add(term(double(k)));
    // Euler-Maclaurin tail; the integral is taken in u = log(k) to tame the slow decay
    boost::math::quadrature::exp_sinh<double> quad;
    // log C(k+d-1, d-1) with k = e^u, written so that large u never overflows
    auto integrand = [&](double u) {
        double logc = 0.0;
        for (int j = 1; j < d; ++j) logc += u + std::log1p(j * std::exp(-u)) - std::log(double(j));
        return std::exp(u - p * logc);
    };
    const double integral =
        quad.integrate(integrand, std::log(double(K)), std::numeric_limits<double>::infinity(), 1e-14);
    const double h = 1.0;
    s.add(integral);
    s.add(0.5 * term(double(K)));
    s.add(-(term(K + h) - term(K - h)) / (2 * h) / 12.0);
    return std::pow(mass, tau) * std::pow(s.value(), 1.0 - tau);
}

struct HolderSample {
    double constant = 0.0;
    long samples = 0;
};

// Empirical tau-Holder constant of x -> fn(x) on an interval; separations are log-uniform
// down to 1e-6 of the domain plus a full-width sweep, so the sup is approached from below.
template <class Fn>
HolderSample sampled_holder(Fn&& fn, const Interval& dom, double tau, long samples, std::uint64_t seed = 7) {
    HolderSample r;
    Rng rng(substream_id(seed, 0x401d + 1));
    const double L = dom.length();
    auto pair = [&](double x, double y) {
        if (x == y) return;
        r.constant = std::max(r.constant, std::abs(fn(x) - fn(y)) / std::pow(std::abs(x - y), tau));
        ++r.samples;
    };
    for (double x : linspace(dom.lo, dom.hi, 65))
        for (double y : linspace(dom.lo, dom.hi, 65))
            if (x < y) pair(x, y);
    for (long i = 0; i < samples; ++i) {
        const double s = L * std::pow(10.0, -6.0 * rng.uniform());
        const double x = dom.lo + (L - s) * rng.uniform();
        pair(x, x + s);
    }
    return r;
}

inline HolderSample log_deriv_holder_constant(const Diffeo& g, double tau, const Interval& dom, long samples = 1000) {
    if (samples < 1000) throw precondition_error("log_deriv_holder_constant: need at least 1000 samples");
    return sampled_holder([&](double x) { return g.log_deriv(x); }, dom, tau, samples);
}

inline constexpr double budget_safety = 1.1;

struct Budget {
    double tau = 1.0;
    double C = 0.0;  // Holder constant of log g' (max over generators), safety factor applied
    double M = 0.0;  // bound on the tau-series of the base interval
    Interval I;
    double L = 0.0;

    static Budget make(double tau, double C, double M, const Interval& I) {
        if (!(tau > 0 && tau <= 1)) throw domain_error("budget: tau must lie in (0,1]");
        if (C < 0 || M < 0) throw domain_error("budget: C and M must be nonnegative");
        Budget b{tau, C, M, I, 0.0};
        b.L = I.length() / (2.0 * std::exp(std::exp2(tau) * C * M));
        return b;
    }
    double log_ratio_bound() const { return std::exp2(tau) * C * M; }
};

struct SchwartzReport {
    bool ok = true;
    long first_violation = -1;  // step k
    std::string condition;      // "(i)" or "(ii)", with side
    double max_log_ratio = 0.0;
    double log_bound = 0.0;
    double series = 0.0;        // sum_{k<n} |w_k(I)|^tau actually seen
    bool hypothesis_ok = true;  // series <= M
    long dropped_points = 0;    // side samples that left a truncated catalog
};

// Checks the two inductive conditions of the distortion lemma along a word: the side
// intervals I' and I'' (width 2L) stay shorter than the image of I, and derivative
// ratios over I u I' and I'' u I stay below exp(2^tau C M). On a truncated gap system
// side points may fall in gaps without a realized image; those are dropped and counted,
// and a side length is then measured on the hull of its surviving points.
inline SchwartzReport schwartz_control(const std::vector<Diffeo>& gens, const std::vector<int>& w, const Interval& I,
                                       const Budget& b,
                                       const std::vector<std::optional<Interval>>& control = {}) {
    SchwartzReport r;
    r.log_bound = b.log_ratio_bound() + std::log1p(1e-6);
    const double twoL = 2.0 * b.L;
    const bool circle = gens.front().is_circle();
    IntervalOrbit img(I);
    std::optional<IntervalOrbit> right(IntervalOrbit(I.hi, twoL)), left(IntervalOrbit(I.lo - twoL, twoL));
    auto wrap = [&](double x) { return circle ? frac(x) : x; };
    std::vector<double> rs = linspace(I.hi, I.hi + twoL, 17), ls = linspace(I.lo - twoL, I.lo, 17);
    for (auto& x : rs) x = wrap(x);
    for (auto& x : ls) x = wrap(x);
    PointOrbit pi(linspace(I.lo, I.hi, 17)), pr(rs, true), pl(ls, true);
    KahanSum series;
    for (std::size_t k = 1; k <= w.size(); ++k) {
        const std::size_t gi = std::size_t(w[k - 1]);
        if (gi < control.size() && control[gi]) {
            const Interval& C = *control[gi];
            if (img.lo() < C.lo - 1e-15 || img.hi() > C.hi + 1e-15)
                throw precondition_error("schwartz_control: image of I leaves the control domain of generator " +
                                         std::to_string(gi) + " at step " + std::to_string(k));
        }
        series.add(std::pow(img.length(), b.tau));
        const Diffeo& g = gens.at(gi);
        img.push(g);
        for (auto* side : {&right, &left}) {
            if (!*side) continue;
            try {
                (*side)->push(g);
            } catch (const truncation_error&) {
                side->reset();
            }
        }
        pi.push(g);
        pr.push(g);
        pl.push(g);
        const double ratio =
            std::max(std::max(pi.max_log(), pr.max_log()) - std::min(pi.min_log(), pr.min_log()),
                     std::max(pi.max_log(), pl.max_log()) - std::min(pi.min_log(), pl.min_log()));
        r.max_log_ratio = std::max(r.max_log_ratio, ratio);
        const double rlen = right ? right->length() : pr.alive_span(circle);
        const double llen = left ? left->length() : pl.alive_span(circle);
        if (r.ok) {
            std::string cond;
            if (rlen > img.length() * (1 + 1e-9)) cond = "(i) right";
            else if (llen > img.length() * (1 + 1e-9)) cond = "(i) left";
            else if (ratio > r.log_bound) cond = "(ii)";
            if (!cond.empty()) {
                r.ok = false;
                r.first_violation = long(k);
                r.condition = cond;
            }
        }
    }
    r.series = series.value();
    r.hypothesis_ok = r.series <= b.M * (1 + 1e-12);
    r.dropped_points = pr.dropped() + pl.dropped();
    return r;
}

enum class Side { left, right, inside, unknown };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::left: return "left";
        case Side::right: return "right";
        case Side::inside: return "inside";
        default: return "unknown";
    }
}

struct HyperbolicCertificate {
    std::vector<int> word;
    double fixed_point = 0.0;
    double derivative = 1.0;
    Side side = Side::unknown;
    Interval bracket;
    double residual = 0.0;
    bool contracting() const { return derivative < 1.0; }
};

inline constexpr double hyperbolicity_margin = 1e-3;

// Signed displacement h(x) - x (on the circle: the representative in [-1/2, 1/2)).
inline double displacement(const Diffeo& h, double x) {
    return h.is_circle() ? circle_diff(h(x), x) : h(x) - x;
}

// First fixed point of h in J found by a sign scan and bisection; certified when
// |log h'(x*)| exceeds the hyperbolicity margin and the residual is below 1e-10.
inline std::optional<HyperbolicCertificate> detect_hyperbolic_fixed_point(const Diffeo& h, const Interval& J,
                                                                          int grid = 256) {
    auto D = [&](double x) { return displacement(h, x); };
    const auto xs = linspace(J.lo, J.hi, grid + 1);
    double prev = D(xs[0]);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cur = i == 0 ? prev : D(xs[i]);
        std::optional<double> root;
        if (cur == 0.0) {
            root = xs[i];
        } else if (i > 0 && (prev < 0) != (cur < 0) && prev != 0.0 && std::abs(prev - cur) < 0.5) {
            root = bisect(D, xs[i - 1], xs[i]);
        }
        prev = cur;
        if (!root) continue;
        HyperbolicCertificate c;
        c.fixed_point = *root;
        c.residual = std::abs(D(*root));
        c.derivative = h.deriv(*root);
        c.bracket = {xs[i == 0 ? 0 : i - 1], xs[i]};
        if (c.residual < 1e-10 && std::abs(std::log(c.derivative)) > hyperbolicity_margin) return c;
        return std::nullopt;  // a fixed point that cannot be certified
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// C^1 route: budgets from a modulus of continuity of the derivatives.

// Largest delta such that log g' oscillates by at most `allowed` over every window of
// width delta in dom (sampled on a fine grid).
inline double oscillation_radius(const Diffeo& g, const Interval& dom, double allowed, int grid = 1 << 14) {
    const auto xs = linspace(dom.lo, dom.hi, grid + 1);
    std::vector<double> v(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) v[i] = g.log_deriv(xs[i]);
    auto osc = [&](std::size_t w) {
        // sliding-window max minus min, window of w+1 nodes
        double worst = 0.0;
        std::vector<std::size_t> qmax, qmin;
        std::size_t hmax = 0, hmin = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            while (qmax.size() > hmax && v[qmax.back()] <= v[i]) qmax.pop_back();
            qmax.push_back(i);
            while (qmin.size() > hmin && v[qmin.back()] >= v[i]) qmin.pop_back();
            qmin.push_back(i);
            if (qmax[hmax] + w < i) ++hmax;
            if (qmin[hmin] + w < i) ++hmin;
            if (i >= w) worst = std::max(worst, v[qmax[hmax]] - v[qmin[hmin]]);
        }
        return worst;
    };
    std::size_t lo = 0, hi = xs.size() - 1;
    if (osc(hi) <= allowed) return dom.length();
    // windows of one extra node must already be admissible, otherwise the grid cannot resolve it
    if (osc(2) > allowed) throw config_error("c1 budget: derivative modulus not resolved by the sampling grid");
    lo = 2;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (osc(mid) <= allowed ? lo : hi) = mid;
    }
    // a window of lo+1 nodes spans lo steps; pairs at distance <= (lo-1) steps are covered robustly
    return double(lo - 1) * dom.length() / grid;
}

struct C1Budget {
    double eps = 0.25;
    double eps0 = 0.0;
    double eps1 = 0.0;
    int N = 0;
    double A = 0.0;
    double A_bar = 0.0;
    double C_bar = 0.0;
};

inline constexpr int c1_enumeration_guard = 22;

// Constants of the C^1 lemma for a two-map spring pair acting on dom = [a, d]:
// eps0 from the derivative modulus, N such that every image of I after N letters is
// shorter than eps0, and C_bar = max(A, A_bar) by exhaustive enumeration of short words.
inline C1Budget c1_budget(const Diffeo& f, const Diffeo& g, const Interval& I, double B, double eps) {
    if (!(eps > 0 && eps < 1.0 / 3.0)) throw domain_error("c1_budget: eps must lie in (0, 1/3)");
    if (!(B >= 1)) throw domain_error("c1_budget: B must be at least 1");
    C1Budget r;
    r.eps = eps;
    const Interval dom = f.domain();
    r.eps0 = std::min(oscillation_radius(f, dom, std::log((2 - eps) / (2 - 2 * eps))),
                      oscillation_radius(g, dom, std::log((2 - eps) / (2 - 2 * eps))));
    r.eps1 = std::min(oscillation_radius(f, dom, std::log((2 - 2 * eps) / (2 - 3 * eps))),
                      oscillation_radius(g, dom, std::log((2 - 2 * eps) / (2 - 3 * eps))));
    const std::vector<Diffeo> gens{f, g};

    // widest cylinder u([a,d]) per level; h_{n+1}(I) sits inside a level-n cylinder
    std::vector<double> widest;
    {
        std::vector<std::pair<double, double>> layer{{dom.lo, dom.hi}};
        widest.push_back(dom.length());
        while (widest.back() > r.eps0) {
            if (int(widest.size()) > c1_enumeration_guard)
                throw config_error("c1 budget: cylinders do not shrink below eps0 within the enumeration guard");
            std::vector<std::pair<double, double>> next;
            double m = 0.0;
            for (const auto& [lo, hi] : layer)
                for (const auto& h : gens) {
                    next.emplace_back(h(lo), h(hi));
                    m = std::max(m, next.back().second - next.back().first);
                }
            layer = std::move(next);
            widest.push_back(m);
        }
    }
    r.N = int(widest.size() - 1) + 1;
    if (r.N > c1_enumeration_guard) throw config_error("c1 budget: N exceeds the enumeration guard");

    // exhaustive words of length <= N with derivatives on a grid of I
    const auto xs = linspace(I.lo, I.hi, 17);
    struct Node {
        std::vector<double> x, logd;
    };
    std::vector<Node> layer{{xs, std::vector<double>(xs.size(), 0.0)}};
    const double shrink = std::log(2 - 2 * eps);
    for (int n = 0; n <= r.N; ++n) {
        for (const auto& nd : layer) {
            const double mx = *std::max_element(nd.logd.begin(), nd.logd.end());
            r.A = std::max(r.A, std::exp(mx + n * shrink) / B);
            if (n == r.N) {
                const double mn = *std::min_element(nd.logd.begin(), nd.logd.end());
                r.A_bar = std::max(r.A_bar, std::exp(mx - mn) / I.length() *
                                                std::pow((2 - 2 * eps) / (2 - eps), r.N));
            }
        }
        if (n == r.N) break;
        std::vector<Node> next;
        next.reserve(layer.size() * 2);
        for (const auto& nd : layer)
            for (const auto& h : gens) {
                Node c = nd;
                for (std::size_t i = 0; i < c.x.size(); ++i) {
                    c.logd[i] += h.log_deriv(c.x[i]);
                    c.x[i] = h(c.x[i]);
                }
                next.push_back(std::move(c));
            }
        layer = std::move(next);
    }
    r.C_bar = std::max(r.A, r.A_bar);
    return r;
}

struct EnvelopeReport {
    bool ok = true;
    long first_violation = -1;
    double worst_margin = -std::numeric_limits<double>::infinity();  // max of log h_n' - log envelope
};

// log of the smallest B >= 1 with |h_n(I)| <= B/(2-eps)^n along the word.
inline double word_log_B(const std::vector<Diffeo>& gens, const std::vector<int>& w, const Interval& I, double eps) {
    IntervalOrbit img(I);
    double logB = img.log_length();
    for (std::size_t n = 1; n <= w.size(); ++n) {
        img.push(gens[std::size_t(w[n - 1])]);
        logB = std::max(logB, img.log_length() + double(n) * std::log(2 - eps));
    }
    return std::max(0.0, logB);
}

// h_n'(x) <= exp(logC) / rate^n for all n along the word, at every point of xs.
inline EnvelopeReport check_envelope(const std::vector<Diffeo>& gens, const std::vector<int>& w,
                                     const std::vector<double>& xs, double logC, double rate) {
    EnvelopeReport r;
    PointOrbit orbit(xs);
    const double lr = std::log(rate);
    for (std::size_t n = 0; n <= w.size(); ++n) {
        if (n > 0) orbit.push(gens[std::size_t(w[n - 1])]);
        const double m = orbit.max_log() + double(n) * lr - logC;
        r.worst_margin = std::max(r.worst_margin, m);
        if (r.ok && m > 1e-12) {
            r.ok = false;
            r.first_violation = long(n);
        }
    }
    return r;
}

// Second C^1 lemma: from the envelope C/(2-2eps)^n at x, the envelope C/(2-3eps)^n at y.
inline EnvelopeReport c1_propagate(const std::vector<Diffeo>& gens, double C, double eps, double eps1,
                                   const std::vector<int>& w, double x, double y) {
    if (!(C >= 1)) throw precondition_error("c1_propagate: C must be at least 1");
    if (std::abs(x - y) > eps1 / C * (1 + 1e-12))
        throw precondition_error("c1_propagate: |x - y| exceeds eps1 / C");
    const auto hyp = check_envelope(gens, w, {x}, std::log(C), 2 - 2 * eps);
    if (!hyp.ok)
        throw precondition_error("c1_propagate: hypothesis envelope fails at x, step " +
                                 std::to_string(hyp.first_violation));
    return check_envelope(gens, w, {y}, std::log(C), 2 - 3 * eps);
}

// ---------------------------------------------------------------------------
// Kopell-type inequalities.

struct Variation {
    double value = 0.0;
    int panels_log2 = 0;
};

// Total variation of log f' on [lo, hi], dyadic refinement until successive values agree to 1e-6.
inline Variation log_deriv_variation(const Diffeo& f, double lo, double hi) {
    Variation v;
    double prev = -1.0;
    for (int k = 4; k <= 24; ++k) {
        const long n = 1L << k;
        double s = 0.0, last = f.log_deriv(lo);
        for (long i = 1; i <= n; ++i) {
            const double cur = f.log_deriv(lo + (hi - lo) * double(i) / double(n));
            s += std::abs(cur - last);
            last = cur;
        }
        v.value = s;
        v.panels_log2 = k;
        if (prev >= 0 && std::abs(s - prev) < 1e-6) break;
        prev = s;
    }
    return v;
}

inline Variation kopell_variation(const Diffeo& f, double b) {
    const Interval dom = f.domain();
    if (!(b > dom.lo && b < dom.hi)) throw domain_error("kopell_variation: b must be interior");
    if (!(f(b) < b)) throw precondition_error("kopell_variation: need f(x) < x");
    return log_deriv_variation(f, dom.lo, b);
}

struct KopellReport {
    double M = 0.0;
    double max_log_ratio = 0.0;
    long violations = 0;
    long trials = 0;
    bool ok() const { return violations == 0; }
};

// |log (f^n)'(v) / (f^n)'(u)| <= M for u, v in [f(b), b].
inline KopellReport kopell_check(const Diffeo& f, double b, long trials, int n_max, std::uint64_t seed) {
    KopellReport r;
    r.M = kopell_variation(f, b).value;
    r.trials = trials;
    const double a = f(b);
    Rng rng(substream_id(seed, 0x6b0));
    for (long t = 0; t < trials; ++t) {
        double u = rng.uniform(a, b), v = rng.uniform(a, b);
        const int n = 1 + int(rng.below(std::uint64_t(n_max)));
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            s += f.log_deriv(v) - f.log_deriv(u);
            u = f(u);
            v = f(v);
        }
        r.max_log_ratio = std::max(r.max_log_ratio, std::abs(s));
        if (std::abs(s) > r.M * (1 + 1e-9) + 1e-12) ++r.violations;
    }
    return r;
}

struct GroseroReport {
    double C = 0.0;
    double max_displacement = 0.0;
    double bound = 0.0;
    bool ok = false;
};

// |x - g(x)| <= C |b - a|^(1 + tau) for a map of [a, b] fixing both ends, with C the sampled
// tau-Holder constant of g'.
inline GroseroReport grosero_bound(const Diffeo& g, double tau, long samples = 4000) {
    const Interval dom = g.domain();
    if (std::abs(g(dom.lo) - dom.lo) > 1e-12 || std::abs(g(dom.hi) - dom.hi) > 1e-12)
        throw precondition_error("grosero_bound: map must fix both endpoints");
    GroseroReport r;
    r.C = sampled_holder([&](double x) { return g.deriv(x); }, dom, tau, samples).constant;
    r.bound = r.C * std::pow(dom.length(), 1.0 + tau);
    for (double x : linspace(dom.lo, dom.hi, 1001)) r.max_displacement = std::max(r.max_displacement, std::abs(x - g(x)));
    r.ok = r.max_displacement <= r.bound * (1 + 1e-12) + 1e-300;
    return r;
}

struct CanoReport {
    double exponent = 0.0;  // tau (1 + tau)
    bool bounded_regime = false;  // exponent >= 1
    bool contracting = true;
    std::vector<double> partial_sums;
};

inline CanoReport cano_series(const Diffeo& f, const Interval& J, double tau, int n_max) {
    CanoReport r;
    r.exponent = tau * (1.0 + tau);
    r.bounded_regime = r.exponent >= 1.0 - 1e-12;
    IntervalOrbit orbit(J);
    KahanSum s;
    double prev = orbit.length();
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0) {
            orbit.push(f);
            if (orbit.length() > prev) r.contracting = false;
            prev = orbit.length();
        }
        s.add(std::pow(orbit.length(), r.exponent));
        r.partial_sums.push_back(s.value());
    }
    return r;
}

// The positive root of t (1 + t)^(d-2) = 1.
inline double tau_d(int d) {
    if (d < 3) throw domain_error("tau_d: d must be at least 3");
    return bisect([d](double t) { return t * std::pow(1.0 + t, d - 2) - 1.0; }, 0.0, 1.0, 1e-15);
}

}  // namespace denjoy
