#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "denjoy/maps.hpp"
#include "denjoy/numeric.hpp"
#include "denjoy/rng.hpp"

namespace denjoy {

using Index = std::vector<int>;

inline long l1_norm(const Index& i) {
    long s = 0;
    for (int v : i) s += std::abs(v);
    return s;
}

struct IndexHash {
    std::size_t operator()(const Index& i) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (int v : i) h = (h ^ std::uint64_t(std::uint32_t(v))) * 0x100000001b3ull;
        return std::size_t(h);
    }
};

struct GapSpec {
    int d = 2;
    int m = 8;
    double epsilon = 1.0;
    int R = 200;
    std::vector<double> theta = {golden, 1.4142135623730951 - 1.0};
    double base_point = 0.0;
    // Realized mass must be at least this fraction of the full (untruncated) mass.
    double min_mass_fraction = 0.4;
};

// Length attached to an index of l1-norm n, before renormalization.
inline double gap_length_norm(int d, int m, double epsilon, long n) {
    const double s = double(n + m);
    return 1.0 / (std::pow(s, d) * std::pow(std::log(s), 1.0 + epsilon));
}

inline double gap_length(const GapSpec& spec, const Index& idx) {
    if (spec.m < 2) throw domain_error("gap_length: m must be at least 2");
    return gap_length_norm(spec.d, spec.m, spec.epsilon, l1_norm(idx));
}

// Sum of raw lengths over all indices of Z^d with norm > R.
inline double gap_tail_mass(int d, int m, double epsilon, long R) {
    const Poly shell = poly_shift(lattice_shell_poly(d), double(R + 1));
    return log_power_series(shell, double(R + 1 + m), d, epsilon);
}

inline double gap_total_mass(int d, int m, double epsilon) {
    return gap_length_norm(d, m, epsilon, 0) + gap_tail_mass(d, m, epsilon, 0);
}

// Smallest |sum r_j theta_j| mod 1 over nonzero integer vectors with |r_j| <= bound.
inline double rational_independence_margin(const std::vector<double>& theta, int bound = 10) {
    const std::size_t d = theta.size();
    std::vector<int> r(d, -bound);
    double best = 1.0;
    while (true) {
        bool zero = true;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            s += r[j] * theta[j];
            zero &= r[j] == 0;
        }
        if (!zero) best = std::min(best, circle_dist(s, 0.0));
        std::size_t j = 0;
        while (j < d && r[j] == bound) r[j++] = -bound;
        if (j == d) break;
        ++r[j];
    }
    return best;
}

struct GapRecord {
    Index idx;
    double left = 0.0;
    double length = 0.0;
    double s = 0.0;  // collapsed (rotation) coordinate; circle only
    double right() const { return left + length; }
    Interval interval() const { return {left, left + length}; }
};

// Immutable catalog shared by the generators of a gap system.
struct GapCatalog {
    GapSpec spec;
    bool circle = true;
    std::vector<GapRecord> gaps;  // sorted by left endpoint
    std::vector<double> lefts;
    std::vector<double> coords;  // gaps[k].s, circle only
    std::unordered_map<Index, std::size_t, IndexHash> lookup;
    double rho = 0.0;             // circle: new length per unit collapsed coordinate off the gaps
    double realized_mass = 0.0;   // sum of normalized realized lengths
    double raw_realized = 0.0;    // sum of raw lengths over the truncated index set
    double raw_total = 0.0;       // raw mass of all of Z^d (series estimate)

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    const GapRecord* find(const Index& i) const {
        auto it = lookup.find(i);
        return it == lookup.end() ? nullptr : &gaps[it->second];
    }
    std::size_t position(const Index& i) const {
        auto it = lookup.find(i);
        return it == lookup.end() ? npos : it->second;
    }
    // Last gap whose left endpoint is <= x, or npos.
    std::size_t locate(double x) const {
        auto it = std::upper_bound(lefts.begin(), lefts.end(), x);
        return it == lefts.begin() ? npos : std::size_t(it - lefts.begin()) - 1;
    }
    std::size_t locate_coord(double u) const {
        auto it = std::upper_bound(coords.begin(), coords.end(), u);
        return it == coords.begin() ? npos : std::size_t(it - coords.begin()) - 1;
    }
    bool in_gap(double x, std::size_t& k) const {
        k = locate(x);
        return k != npos && x <= gaps[k].right();
    }

    void index_catalog() {
        lefts.clear();
        coords.clear();
        lookup.clear();
        realized_mass = 0.0;
        KahanSum mass;
        for (std::size_t k = 0; k < gaps.size(); ++k) {
            lefts.push_back(gaps[k].left);
            coords.push_back(gaps[k].s);
            lookup.emplace(gaps[k].idx, k);
            mass.add(gaps[k].length);
        }
        realized_mass = mass.value();
    }

    // Circle: collapse a point to its rotation coordinate (unreduced when it wraps).
    double collapse(double x) const {
        std::size_t k;
        if (in_gap(x, k)) return gaps[k].s;
        if (k == npos) return gaps.back().s + (x + 1.0 - gaps.back().right()) / rho - 1.0;
        return gaps[k].s + (x - gaps[k].right()) / rho;
    }
    // Circle: lift of the point sitting over rotation coordinate u (inverse of collapse off the gaps).
    double expand(double u) const {
        const double w = std::floor(u);
        double r = u - w;
        if (r >= 1.0) r = 0.0;
        const std::size_t k = locate_coord(r);
        double y;
        if (k == npos) {
            const auto& g = gaps.back();
            y = g.right() + rho * (r + 1.0 - g.s) - 1.0;
            y = std::min(y, gaps.front().left);
        } else if (r == gaps[k].s) {
            y = gaps[k].left;
        } else {
            y = gaps[k].right() + rho * (r - gaps[k].s);
            const double next = k + 1 < gaps.size() ? gaps[k + 1].left : gaps.front().left + 1.0;
            y = std::min(y, next);
        }
        return y + w;
    }
};

// Generator of a gap system: maps the gap of index i onto the gap of index i + shift by the
// equivariant Yoccoz transfer. Off the gaps (circle) it transports the rotation by the
// collapsing map; on an interval catalog the complement of the gaps is not realized.
class YoccozGapImpl final : public MapImpl {
public:
    YoccozGapImpl(std::shared_ptr<const GapCatalog> cat, Index shift)
        : cat_(std::move(cat)), shift_(std::move(shift)) {
        for (std::size_t j = 0; j < shift_.size(); ++j)
            if (cat_->circle) angle_ += shift_[j] * cat_->spec.theta[j];
    }
    MapKind kind() const override { return MapKind::yoccoz_gap; }

    double value(double x) const override { return apply(x, shift_, angle_); }
    double inverse_value(double y) const override {
        Index back(shift_.size());
        for (std::size_t j = 0; j < back.size(); ++j) back[j] = -shift_[j];
        if (!cat_->circle) return apply(y, back, -angle_);
        double x = frac(apply(frac(y), back, -angle_));
        const double miss = apply(x, shift_, angle_) - y;
        if (miss > 0.5) x -= 1.0;
        if (miss < -0.5) x += 1.0;
        return x;
    }
    double deriv(double x) const override {
        std::size_t k;
        if (cat_->in_gap(x, k)) {
            const GapRecord& g = cat_->gaps[k];
            const GapRecord& t = target(g, shift_);
            return gap_transfer_deriv(g.interval(), t.interval(), x);
        }
        if (!cat_->circle && x != 0.0 && x != 1.0) unrealized(x);
        return 1.0;
    }
    std::string describe() const override {
        std::ostringstream os;
        os << "gap-map(";
        for (std::size_t j = 0; j < shift_.size(); ++j) os << (j ? "," : "") << shift_[j];
        os << ')';
        return os.str();
    }
    const Index& shift() const { return shift_; }
    const GapCatalog& catalog() const { return *cat_; }

private:
    const GapRecord& target(const GapRecord& g, const Index& shift) const {
        Index t = g.idx;
        for (std::size_t j = 0; j < t.size(); ++j) t[j] += shift[j];
        const GapRecord* r = cat_->find(t);
        if (!r) {
            std::ostringstream os;
            os << "gap index shifted beyond truncation radius " << cat_->spec.R;
            throw truncation_error(os.str());
        }
        return *r;
    }
    [[noreturn]] void unrealized(double x) const {
        std::ostringstream os;
        os.precision(17);
        os << "point " << x << " lies in the collapsed remainder of an interval catalog";
        throw truncation_error(os.str());
    }

    double apply(double x, const Index& shift, double angle) const {
        std::size_t k;
        if (cat_->in_gap(x, k)) {
            const GapRecord& g = cat_->gaps[k];
            const GapRecord& t = target(g, shift);
            double y = gap_transfer(g.interval(), t.interval(), x);
            if (cat_->circle) y += std::round(g.s + angle - t.s);
            return y;
        }
        if (!cat_->circle) {
            if (x == 0.0 || x == 1.0) return x;
            unrealized(x);
        }
        // Off the gaps: transport the rotation, then keep the image between the images of the
        // two neighbouring gaps so rounding near an orbit point cannot jump across a gap.
        const auto& gaps = cat_->gaps;
        const std::size_t n = gaps.size();
        double sa, sb;
        std::size_t a, b;
        if (k == GapCatalog::npos) {
            a = n - 1, b = 0;
            sa = gaps[a].s - 1.0, sb = gaps[b].s;
        } else {
            a = k, b = k + 1 < n ? k + 1 : 0;
            sa = gaps[a].s, sb = k + 1 < n ? gaps[b].s : gaps[b].s + 1.0;
        }
        double y = cat_->expand(cat_->collapse(x) + angle);
        if (const GapRecord* t = shifted(gaps[a], shift)) y = std::max(y, t->right() + std::round(sa + angle - t->s));
        if (const GapRecord* t = shifted(gaps[b], shift)) y = std::min(y, t->left + std::round(sb + angle - t->s));
        return y;
    }
    const GapRecord* shifted(const GapRecord& g, const Index& shift) const {
        Index t = g.idx;
        for (std::size_t j = 0; j < t.size(); ++j) t[j] += shift[j];
        return cat_->find(t);
    }

    std::shared_ptr<const GapCatalog> cat_;
    Index shift_;
    double angle_ = 0.0;
};

class GapSystem {
public:
    GapSystem() = default;
    explicit GapSystem(std::shared_ptr<const GapCatalog> cat) : cat_(std::move(cat)) {
        const int d = cat_->spec.d;
        for (int j = 0; j < d; ++j) {
            Index e(d, 0);
            e[j] = cat_->circle ? 1 : -1;
            gens_.push_back(Diffeo(std::make_shared<YoccozGapImpl>(cat_, e), cat_->circle));
        }
    }

    const GapSpec& spec() const { return cat_->spec; }
    bool is_circle() const { return cat_->circle; }
    const GapCatalog& catalog() const { return *cat_; }
    const std::shared_ptr<const GapCatalog>& catalog_ptr() const { return cat_; }
    const std::vector<GapRecord>& gaps() const { return cat_->gaps; }
    const std::vector<Diffeo>& generators() const { return gens_; }
    const Diffeo& generator(int j) const { return gens_.at(std::size_t(j)); }
    double total_gap_mass() const { return cat_->realized_mass; }
    double remainder_mass() const { return 1.0 - cat_->realized_mass; }
    const GapRecord& base_gap() const { return *cat_->find(Index(std::size_t(cat_->spec.d), 0)); }
    const GapRecord* find(const Index& i) const { return cat_->find(i); }

    // Circle: rotation coordinate of the point x (gaps collapse to their orbit point).
    double collapse(double x) const { return frac(cat_->collapse(frac(x))); }

private:
    std::shared_ptr<const GapCatalog> cat_;
    std::vector<Diffeo> gens_;
};

namespace detail {

inline void check_spec(const GapSpec& spec, bool circle) {
    if (spec.d < 1) throw config_error("gap spec: d must be at least 1");
    if (spec.m < 2) throw config_error("gap spec: m must be at least 2");
    if (!(spec.epsilon > 0)) throw config_error("gap spec: epsilon must be positive");
    if (spec.R < 1) throw config_error("gap spec: truncation radius R must be at least 1");
    if (circle) {
        if (int(spec.theta.size()) != spec.d)
            throw config_error("gap spec: need one rotation angle per generator");
        for (double t : spec.theta)
            if (!(t > 0 && t < 1)) throw config_error("gap spec: rotation angles must lie in (0,1)");
    }
}

// All indices of Z^d with l1-norm <= R, in lexicographic order.
inline std::vector<Index> index_ball(int d, int R) {
    std::vector<Index> out;
    Index cur(std::size_t(d), 0);
    std::function<void(int, int)> rec = [&](int j, int budget) {
        if (j == d) {
            out.push_back(cur);
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            cur[std::size_t(j)] = v;
            rec(j + 1, budget - std::abs(v));
        }
    };
    rec(0, R);
    return out;
}

}  // namespace detail

inline GapSystem build_circle_denjoy(const GapSpec& spec) {
    detail::check_spec(spec, true);
    const double margin = rational_independence_margin(spec.theta);
    if (margin < 1e-9) throw config_error("gap spec: rotation angles fail the rational-independence guard");

    auto cat = std::make_shared<GapCatalog>();
    cat->spec = spec;
    cat->circle = true;
    for (const Index& i : detail::index_ball(spec.d, spec.R)) {
        GapRecord g;
        g.idx = i;
        double s = spec.base_point;
        for (int j = 0; j < spec.d; ++j) s += i[std::size_t(j)] * spec.theta[std::size_t(j)];
        g.s = frac(s);
        g.length = gap_length(spec, i);
        cat->gaps.push_back(std::move(g));
    }
    std::sort(cat->gaps.begin(), cat->gaps.end(), [](const GapRecord& a, const GapRecord& b) { return a.s < b.s; });
    for (std::size_t k = 1; k < cat->gaps.size(); ++k)
        if (!(cat->gaps[k].s > cat->gaps[k - 1].s))
            throw config_error("gap spec: two orbit points coincide numerically");

    KahanSum raw;
    for (const auto& g : cat->gaps) raw.add(g.length);
    const double tail = gap_tail_mass(spec.d, spec.m, spec.epsilon, spec.R);
    cat->raw_realized = raw.value();
    cat->raw_total = cat->raw_realized + tail;
    const double fraction = cat->raw_realized / cat->raw_total;
    if (fraction < spec.min_mass_fraction) {
        std::ostringstream os;
        os << "truncation radius R=" << spec.R << " keeps only " << fraction
           << " of the gap mass (threshold " << spec.min_mass_fraction << "); increase R";
        throw config_error(os.str());
    }
    // The unrealized gaps are carried as a remainder spread uniformly in the rotation coordinate.
    const double Z = cat->raw_total;
    cat->rho = tail / Z;
    KahanSum prefix;
    for (auto& g : cat->gaps) {
        g.left = (prefix.value() + tail * g.s) / Z;
        prefix.add(g.length);
        g.length /= Z;
    }
    for (std::size_t k = 1; k < cat->gaps.size(); ++k)
        if (!(cat->gaps[k - 1].right() < cat->gaps[k].left)) throw internal_error("circle catalog gaps overlap");
    if (!(cat->gaps.back().right() < 1.0)) throw internal_error("circle catalog exceeds unit length");
    cat->index_catalog();
    return GapSystem(cat);
}

inline GapSystem build_interval_pixton(const GapSpec& spec_in) {
    GapSpec spec = spec_in;
    spec.theta.clear();
    detail::check_spec(spec, false);
    const int d = spec.d, R = spec.R, m = spec.m;
    const double eps = spec.epsilon;

    // mass of all indices whose first j-1 coordinates have norm sigma_prefix and whose j-th
    // coordinate k satisfies |k| >= q: tail(j, sigma_prefix + q) below.
    std::vector<std::vector<double>> tail(std::size_t(d + 1));
    for (int j = 1; j <= d; ++j) {
        tail[std::size_t(j)].resize(std::size_t(R + 2));
        const Poly ball = lattice_ball_poly(d - j);
        for (int sigma = 0; sigma <= R + 1; ++sigma)
            tail[std::size_t(j)][std::size_t(sigma)] = log_power_series(ball, double(sigma + m), d, eps);
    }
    const double Z = gap_total_mass(d, m, eps);

    auto cat = std::make_shared<GapCatalog>();
    cat->spec = spec;
    cat->circle = false;
    cat->raw_total = Z;
    KahanSum raw;
    const auto ball = detail::index_ball(d, R);
    const GapRecord* prev = nullptr;
    for (const Index& i : ball) {
        GapRecord g;
        g.idx = i;
        const double len = gap_length(spec, i);
        raw.add(len);
        g.length = len / Z;
        // consecutive last coordinates inside one fiber are adjacent
        bool adjacent = prev != nullptr;
        if (adjacent)
            for (int j = 0; j + 1 < d; ++j) adjacent &= prev->idx[std::size_t(j)] == i[std::size_t(j)];
        if (adjacent) {
            g.left = prev->right();
        } else {
            KahanSum x;
            int s = 0;
            for (int j = 1; j <= d; ++j) {
                const int v = i[std::size_t(j - 1)];
                const auto& T = tail[std::size_t(j)];
                if (v <= 0) {
                    x.add(T[std::size_t(s - v + 1)]);
                } else {
                    x.add(T[std::size_t(s + 1)]);
                    x.add(T[std::size_t(s)]);
                    x.add(-T[std::size_t(s + v)]);
                }
                s += std::abs(v);
            }
            g.left = x.value() / Z;
            if (prev && !(g.left > prev->right())) throw internal_error("interval catalog gaps overlap");
        }
        cat->gaps.push_back(std::move(g));
        prev = &cat->gaps.back();
    }
    cat->raw_realized = raw.value();
    if (!(cat->gaps.back().right() < 1.0) || !(cat->gaps.front().left > 0.0))
        throw internal_error("interval catalog exceeds [0,1]");
    cat->index_catalog();
    return GapSystem(cat);
}

// A Mobius map of the interval I fixing both endpoints; multiplier lambda at the left end.
inline Diffeo mobius_bump(const Interval& I, double lambda) {
    if (!(lambda > 0)) throw domain_error("mobius_bump: multiplier must be positive");
    // u -> lambda u / (1 + (lambda - 1) u) in the affine coordinate u of I, conjugated back.
    const double L = I.length();
    Mat2 inner{lambda, 0.0, lambda - 1.0, 1.0};
    Mat2 to{1.0 / L, -I.lo / L, 0.0, 1.0}, from{L, I.lo, 0.0, 1.0};
    return mobius_interval(from * inner * to, I);
}

// Extension of a map h0 of the base gap to the whole space, commuting with the generators:
// on the gap w(I0) it is w h0 w^{-1}, which by equivariance is phi(I0,I) h0 phi(I,I0).
class CommutingExtensionImpl final : public MapImpl {
public:
    CommutingExtensionImpl(std::shared_ptr<const GapCatalog> cat, Diffeo h0)
        : cat_(std::move(cat)), h0_(std::move(h0)) {
        base_ = cat_->find(Index(std::size_t(cat_->spec.d), 0))->interval();
    }
    MapKind kind() const override { return MapKind::word; }
    double value(double x) const override {
        std::size_t k;
        if (!cat_->in_gap(x, k)) return x;
        const Interval I = cat_->gaps[k].interval();
        return gap_transfer(base_, I, h0_(gap_transfer(I, base_, x)));
    }
    double inverse_value(double y) const override {
        std::size_t k;
        if (!cat_->in_gap(y, k)) return y;
        const Interval I = cat_->gaps[k].interval();
        return gap_transfer(base_, I, h0_.eval_inv(gap_transfer(I, base_, y)));
    }
    double deriv(double x) const override {
        std::size_t k;
        if (!cat_->in_gap(x, k)) return 1.0;
        const Interval I = cat_->gaps[k].interval();
        const double u = gap_transfer(I, base_, x);
        const double v = h0_(u);
        return gap_transfer_deriv(base_, I, v) * h0_.deriv(u) * gap_transfer_deriv(I, base_, x);
    }
    std::string describe() const override { return "commuting-extension(" + h0_.describe() + ")"; }

private:
    std::shared_ptr<const GapCatalog> cat_;
    Diffeo h0_;
    Interval base_;
};

inline Diffeo extend_by_commutation(const GapSystem& sys, const Diffeo& h0) {
    const Interval I0 = sys.base_gap().interval();
    const double tol = 1e-12 * std::max(1.0, I0.length());
    if (std::abs(h0(h0.domain().lo) - h0.domain().lo) > tol || std::abs(h0(h0.domain().hi) - h0.domain().hi) > tol ||
        std::abs(h0.domain().lo - I0.lo) > tol || std::abs(h0.domain().hi - I0.hi) > tol)
        throw domain_error("extend_by_commutation: h0 must be a map of the base gap fixing its endpoints");
    return Diffeo(std::make_shared<CommutingExtensionImpl>(sys.catalog_ptr(), h0), sys.is_circle());
}

// ---------------------------------------------------------------------------
// Regularity diagnostics.

struct Modulus {
    enum class Kind { power, log_power } kind = Kind::power;
    double tau = 1.0;    // power
    int d = 2;           // log_power: s^(1/d) log(1/s)^(1/d + epsilon)
    double epsilon = 1.0;

    static Modulus power(double tau) { return {Kind::power, tau, 0, 0.0}; }
    static Modulus log_power(int d, double epsilon) { return {Kind::log_power, 0.0, d, epsilon}; }

    double operator()(double s) const {
        if (kind == Kind::power) return std::pow(s, tau);
        return std::pow(s, 1.0 / d) * std::pow(std::log(1.0 / s), 1.0 / d + epsilon);
    }
};

struct HolderEstimate {
    double constant = 0.0;
    long pairs = 0;
};

namespace detail {
inline double pair_distance(const Diffeo& f, double x, double y) {
    return f.is_circle() ? circle_dist(x, y) : std::abs(x - y);
}
inline void holder_update(const Diffeo& f, const Modulus& mod, double x, double y, HolderEstimate& est) {
    const double s = pair_distance(f, x, y);
    if (!(s > 0) || s >= 0.5) return;
    const double e = mod(s);
    if (!(e > 0)) return;
    est.constant = std::max(est.constant, std::abs(f.deriv(x) - f.deriv(y)) / e);
    ++est.pairs;
}
}  // namespace detail

// Empirical sup of |f'(x) - f'(y)| / modulus(|x - y|) over a deterministic pair sequence with
// log-uniform separations; more samples only add pairs.
inline HolderEstimate holder_constant(const Diffeo& f, const Modulus& mod, long samples, std::uint64_t seed = 1) {
    HolderEstimate est;
    Rng rng(substream_id(seed, 0x401d));
    const Interval dom = f.domain();
    for (long i = 0; i < samples; ++i) {
        const double x = dom.lo + dom.length() * rng.uniform();
        const double s = dom.length() * std::exp2(-40.0 * rng.uniform());
        double y = x + s;
        if (!f.is_circle()) {
            if (y > dom.hi) y = x - s;
            if (y < dom.lo) continue;
        }
        try {
            detail::holder_update(f, mod, x, f.is_circle() ? frac(y) : y, est);
        } catch (const truncation_error&) {
        }
    }
    return est;
}

// Gap-aware version for generator j of a gap system: every gap with a realized image is
// scanned on a fixed relative lattice of pairs, then `samples` random cross pairs are added.
inline HolderEstimate holder_constant(const GapSystem& sys, int j, const Modulus& mod, long samples,
                                      std::uint64_t seed = 1) {
    const Diffeo& f = sys.generator(j);
    HolderEstimate est;
    static constexpr double rel[] = {0.0, 0.02, 0.08, 0.2, 0.35, 0.5, 0.65, 0.8, 0.92, 0.98, 1.0};
    for (const auto& g : sys.gaps()) {
        try {
            f.deriv(g.left + 0.5 * g.length);
        } catch (const truncation_error&) {
            continue;
        }
        for (std::size_t a = 0; a < std::size(rel); ++a)
            for (std::size_t b = a + 1; b < std::size(rel); ++b)
                detail::holder_update(f, mod, g.left + rel[a] * g.length, g.left + rel[b] * g.length, est);
    }
    const HolderEstimate cross = holder_constant(f, mod, samples, seed);
    est.constant = std::max(est.constant, cross.constant);
    est.pairs += cross.pairs;
    return est;
}

// l_n = min over i_j >= 0 with sum n of |f_1^{i_1} ... f_d^{i_d}(I0)|, computed by pushing the
// endpoints of the base gap through the generators.
inline std::vector<double> min_gap_sequence(const GapSystem& sys, int n_max) {
    const int d = sys.spec().d;
    if (n_max > sys.spec().R)
        throw truncation_error("min_gap_sequence: n_max exceeds the truncation radius", sys.spec().R);
    const auto& gens = sys.generators();
    const Interval I0 = sys.base_gap().interval();
    struct State {
        Index idx;
        double lo, hi;
    };
    std::vector<State> layer{{Index(std::size_t(d), 0), I0.lo, I0.hi}};
    std::vector<double> out{I0.length()};
    auto length = [&](const State& s) {
        return sys.is_circle() ? frac(s.hi - s.lo) : s.hi - s.lo;
    };
    for (int n = 1; n <= n_max; ++n) {
        std::unordered_map<Index, State, IndexHash> next;
        for (const auto& st : layer)
            for (int j = 0; j < d; ++j) {
                Index k = st.idx;
                ++k[std::size_t(j)];
                if (next.count(k)) continue;
                try {
                    next.emplace(k, State{k, gens[std::size_t(j)](st.lo), gens[std::size_t(j)](st.hi)});
                } catch (const truncation_error&) {
                    throw truncation_error("min_gap_sequence: image left the realized catalog", n - 1);
                }
            }
        layer.clear();
        double best = std::numeric_limits<double>::infinity();
        for (auto& kv : next) {
            best = std::min(best, length(kv.second));
            layer.push_back(std::move(kv.second));
        }
        std::sort(layer.begin(), layer.end(), [](const State& a, const State& b) { return a.idx < b.idx; });
        out.push_back(best);
    }
    return out;
}

struct TangenteReport {
    double A = 0.0;
    bool precondition_ok = true;
    std::vector<int> step_failures;   // n with l_{n+1} < l_n (1 - C l_n^{1/d})
    std::vector<int> power_failures;  // n with l_n < A / n^d
};

inline TangenteReport check_tangente_recursion(const std::vector<double>& seq, double C, int d) {
    TangenteReport r;
    if (seq.size() < 2) throw domain_error("check_tangente_recursion: need l_0 and l_1");
    const double cap = std::pow(1.0 / (C * (1.0 + 1.0 / d)), d);
    for (double v : seq)
        if (!(v > 0) || v > cap) r.precondition_ok = false;
    r.A = std::min(seq[1], std::pow(double(d), d) / (std::exp2(double(d) * d) * std::pow(C, d)));
    for (std::size_t n = 0; n + 1 < seq.size(); ++n)
        if (seq[n + 1] < seq[n] * (1.0 - C * std::pow(seq[n], 1.0 / d))) r.step_failures.push_back(int(n));
    for (std::size_t n = 1; n < seq.size(); ++n)
        if (seq[n] < r.A / std::pow(double(n), d)) r.power_failures.push_back(int(n));
    return r;
}

}  // namespace denjoy
