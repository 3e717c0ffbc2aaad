#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "denjoy/distortion.hpp"
#include "denjoy/maps.hpp"
#include "denjoy/numeric.hpp"
#include "denjoy/rng.hpp"
#include "denjoy/walks.hpp"

namespace denjoy {

// ---------------------------------------------------------------------------
// Finitely supported laws on a group of circle or interval maps

inline Diffeo identity_map(bool circle) { return circle ? identity_circle() : affine(1.0, 0.0); }

namespace detail {

inline bool inverse_pair(const Diffeo& f, const Diffeo& g, const std::vector<double>& xs) {
    for (double x : xs) {
        const double y = g(f(x));
        const double err = f.is_circle() ? circle_dist(y, x) : std::abs(y - x);
        if (!(err <= 1e-9)) return false;
    }
    return true;
}

}  // namespace detail

struct GeneratorMeasure {
    std::vector<Diffeo> generators;
    std::vector<double> weights;
    std::vector<int> inverse_index;  // -1 when the inverse is not listed
    bool symmetric = false;          // every inverse listed, with the same weight

    static GeneratorMeasure make(std::vector<Diffeo> gens, std::vector<double> w) {
        if (gens.empty() || gens.size() != w.size())
            throw config_error("generator measure: need one positive weight per generator");
        const bool circle = gens.front().is_circle();
        KahanSum s;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] > 0)) throw config_error("generator measure: weights must be positive");
            if (gens[i].is_circle() != circle) throw config_error("generator measure: mixes circle and interval maps");
            s.add(w[i]);
        }
        if (std::abs(s.value() - 1.0) > 1e-12) throw config_error("generator measure: weights must sum to 1");
        GeneratorMeasure m{std::move(gens), std::move(w), {}, true};
        const auto xs = linspace(0.0, 1.0, 33);
        m.inverse_index.assign(m.generators.size(), -1);
        for (std::size_t i = 0; i < m.generators.size(); ++i) {
            for (std::size_t j = 0; j < m.generators.size(); ++j) {
                if (!detail::inverse_pair(m.generators[i], m.generators[j], xs)) continue;
                if (m.inverse_index[i] < 0 || std::abs(m.weights[j] - m.weights[i]) <= 1e-12) m.inverse_index[i] = int(j);
            }
            const int j = m.inverse_index[i];
            if (j < 0 || std::abs(m.weights[std::size_t(j)] - m.weights[i]) > 1e-12) m.symmetric = false;
        }
        return m;
    }

    // {g, g^-1} for every listed g, each with half of its weight
    static GeneratorMeasure symmetrized(const std::vector<Diffeo>& gens, const std::vector<double>& w) {
        std::vector<Diffeo> all;
        std::vector<double> ws;
        for (std::size_t i = 0; i < gens.size(); ++i) {
            all.push_back(gens[i]);
            all.push_back(gens[i].inverse());
            ws.push_back(0.5 * w.at(i));
            ws.push_back(0.5 * w.at(i));
        }
        return make(std::move(all), std::move(ws));
    }

    bool circle() const { return generators.front().is_circle(); }
    std::size_t size() const { return generators.size(); }
    WordLaw law() const { return WordLaw::bernoulli(weights); }
    // weight of g^-1, which is what the stationarity inequality for g involves
    double inverse_weight(std::size_t i) const {
        const int j = inverse_index.at(i);
        return j < 0 ? 0.0 : weights[std::size_t(j)];
    }
};

inline GeneratorMeasure rotation_measure(double theta = golden) { return GeneratorMeasure::make({rotation(theta)}, {1.0}); }

inline GeneratorMeasure symmetric_rotation_measure(double theta = golden) {
    return GeneratorMeasure::symmetrized({rotation(theta)}, {1.0});
}

// Attracting fixed point at `at` with derivative 1/multiplier, repelling one at at + 1/2.
inline Diffeo north_south(double multiplier, double at = 0.0) {
    if (!(multiplier > 0)) throw domain_error("north_south: multiplier must be positive");
    const double r = std::sqrt(multiplier);
    const Mat2 R = rotation_matrix(pi * at);
    return mobius_circle(R * Mat2{r, 0.0, 0.0, 1.0 / r} * R.inverse());
}

// diag(2, 1/2) and its conjugate by an eighth of a turn, with their inverses at weight 1/4.
inline GeneratorMeasure psl_pair() {
    return GeneratorMeasure::symmetrized({north_south(4.0, 0.0), north_south(4.0, 0.25)}, {0.5, 0.5});
}

// f(x) = x/(2-x) and its inverse on [0,1].
inline GeneratorMeasure interval_escape_pair() {
    return GeneratorMeasure::symmetrized({mobius_interval({1.0, 0.0, -1.0, 2.0})}, {1.0});
}

// h = g_{w[0]} o g_{w[1]} o ... o g_{w[n-1]}: the last letter acts first. Mobius letters are
// multiplied out into one matrix.
inline Diffeo left_product(const std::vector<Diffeo>& gens, const std::vector<int>& w, std::size_t n) {
    n = std::min(n, w.size());
    if (n == 0) return identity_map(gens.front().is_circle());
    if (gens.front().is_circle()) {
        std::vector<Mat2> mats(gens.size());
        bool all_mobius = true;
        for (std::size_t i = 0; i < gens.size() && all_mobius; ++i) all_mobius = mobius_matrix(gens[i], mats[i]);
        if (all_mobius) {
            Mat2 m;
            for (std::size_t k = 0; k < n; ++k) m = m * mats[std::size_t(w[k])];
            return mobius_circle_unimodular(m);
        }
    }
    std::vector<Letter> letters;
    letters.reserve(n);
    for (std::size_t k = 0; k < n; ++k) letters.push_back({gens.at(std::size_t(w[k])), 1});
    return word(std::move(letters));
}

// ---------------------------------------------------------------------------
// Measures: a CDF on a uniform grid (linear in between) plus a list of atoms

struct Atom {
    double x = 0.0;
    double mass = 0.0;
};

inline constexpr int default_grid = 4096;
inline constexpr double atom_fold_threshold = 1e-6;
inline constexpr std::size_t max_atoms = std::size_t(1) << 16;
inline constexpr std::size_t interval_atom_cap = 2048;

class MeasureCDF {
public:
    MeasureCDF() : MeasureCDF(default_grid, true) {}
    MeasureCDF(int G, bool circle) : F_(std::size_t(check_grid(G)) + 1, 0.0), circle_(circle) { refresh(); }

    static MeasureCDF lebesgue(int G = default_grid, bool circle = true) {
        MeasureCDF m(G, circle);
        for (int i = 0; i <= G; ++i) m.F_[std::size_t(i)] = double(i) / G;
        m.refresh();
        return m;
    }
    static MeasureCDF dirac(double x, int G = default_grid, bool circle = true) {
        MeasureCDF m(G, circle);
        m.atoms_ = {{circle ? frac(x) : std::clamp(x, 0.0, 1.0), 1.0}};
        m.refresh();
        return m;
    }
    static MeasureCDF from_parts(std::vector<double> F, std::vector<Atom> atoms, bool circle) {
        MeasureCDF m(int(F.size()) - 1, circle);
        if (F.front() != 0.0) throw domain_error("measure: grid CDF must start at 0");
        for (std::size_t i = 1; i < F.size(); ++i)
            if (!(F[i] >= F[i - 1])) throw domain_error("measure: grid CDF must be nondecreasing");
        for (const auto& a : atoms)
            if (!(a.mass >= 0) || !(a.x >= 0 && a.x <= 1)) throw domain_error("measure: bad atom");
        m.F_ = std::move(F);
        m.atoms_ = std::move(atoms);
        m.normalize_atoms();
        if (std::abs(m.total_mass() - 1.0) > 1e-12) throw domain_error("measure: total mass must be 1");
        return m;
    }

    int grid() const { return int(F_.size()) - 1; }
    bool circle() const { return circle_; }
    double step() const { return 1.0 / grid(); }
    const std::vector<double>& grid_cdf() const { return F_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double continuous_mass() const { return F_.back(); }
    double atom_mass() const { return atom_cum_.back(); }
    double total_mass() const { return continuous_mass() + atom_mass(); }
    double cell_mass(int i) const { return F_[std::size_t(i) + 1] - F_[std::size_t(i)]; }

    double cont(double x) const {
        const int G = grid();
        if (x <= 0) return 0.0;
        if (x >= 1) return F_.back();
        const int i = std::min(int(x * G), G - 1);
        const double t = x * G - i;
        return F_[std::size_t(i)] + t * (F_[std::size_t(i) + 1] - F_[std::size_t(i)]);
    }
    // continuous part lifted to R on the circle
    double lifted_cont(double y) const {
        const double fl = std::floor(y);
        return fl * continuous_mass() + cont(y - fl);
    }
    double cdf(double x) const {  // nu([0, x])
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x, [](double v, const Atom& a) { return v < a.x; });
        return cont(x) + atom_cum_[std::size_t(it - atoms_.begin())];
    }
    double cdf_left(double x) const {  // nu([0, x))
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x, [](const Atom& a, double v) { return a.x < v; });
        return cont(x) + atom_cum_[std::size_t(it - atoms_.begin())];
    }
    double mass(double a, double b) const { return cdf(b) - cdf_left(a); }  // closed [a, b]

    // Lifted CDF Phi(y + 1) = Phi(y) + total on the circle; plain CDF clamped to [0,1] otherwise.
    double lifted(double y) const {
        if (!circle_) return cdf(std::clamp(y, 0.0, 1.0));
        const double fl = std::floor(y);
        return fl * total_mass() + cdf(y - fl);
    }
    double lifted_left(double y) const {
        if (!circle_) return cdf_left(std::clamp(y, 0.0, 1.0));
        const double fl = std::floor(y);
        return fl * total_mass() + cdf_left(y - fl);
    }
    // smallest y with lifted(y) >= v
    double lifted_inverse(double v) const {
        const double tot = total_mass();
        double n = std::ceil(v / tot) - 1.0, r = v - n * tot;
        if (!circle_) {
            n = 0.0;
            r = std::clamp(v, 0.0, tot);
            if (r <= 0) return 0.0;
        }
        auto it = std::lower_bound(bp_r_.begin(), bp_r_.end(), r);
        std::size_t k = std::size_t(it - bp_r_.begin());
        if (k >= bp_x_.size()) k = bp_x_.size() - 1;
        double y;
        if (k == 0 || bp_l_[k] < r) {
            y = bp_x_[k];
        } else {
            const double den = bp_l_[k] - bp_r_[k - 1];
            y = den > 0 ? bp_x_[k - 1] + (r - bp_r_[k - 1]) / den * (bp_x_[k] - bp_x_[k - 1]) : bp_x_[k - 1];
        }
        return n + y;
    }
    double quantile(double p) const { return std::clamp(lifted_inverse(p * total_mass()), 0.0, 1.0); }
    // grid nodes and atom positions in [0, 1]; the CDF is linear between consecutive ones
    const std::vector<double>& breakpoints() const { return bp_x_; }

    double min_cell_mass() const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid(); ++i) m = std::min(m, cell_mass(i));
        return m;
    }

    // Atoms lighter than `threshold` (and the lightest ones beyond `cap`) are spread over their grid cell.
    // Interval measures never fold: mass escaping to an endpoint lives on a geometric lattice that a
    // grid cell would smear back inward. Their excess atoms merge into the nearest survivor instead.
    void fold_atoms(double threshold = atom_fold_threshold, std::size_t cap = max_atoms) {
        if (atoms_.empty()) return;
        if (!circle_) {
            merge_excess(std::min(cap, interval_atom_cap));
            return;
        }
        std::vector<Atom> keep, drop;
        for (const auto& a : atoms_) (a.mass < threshold ? drop : keep).push_back(a);
        if (keep.size() > cap) {
            std::nth_element(keep.begin(), keep.begin() + long(keep.size() - cap), keep.end(),
                             [](const Atom& a, const Atom& b) { return a.mass < b.mass; });
            drop.insert(drop.end(), keep.begin(), keep.begin() + long(keep.size() - cap));
            keep.erase(keep.begin(), keep.begin() + long(keep.size() - cap));
            std::sort(keep.begin(), keep.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
        }
        if (drop.empty()) return;
        const int G = grid();
        std::vector<double> cell(std::size_t(G), 0.0);
        for (const auto& a : drop) cell[std::size_t(std::clamp(int(a.x * G), 0, G - 1))] += a.mass;
        double run = 0.0;
        for (int i = 1; i <= G; ++i) {
            run += cell[std::size_t(i) - 1];
            F_[std::size_t(i)] += run;
        }
        atoms_ = std::move(keep);
        refresh();
    }

    // w_a a + w_b b on a common grid
    static MeasureCDF mix(const MeasureCDF& a, double wa, const MeasureCDF& b, double wb) {
        if (a.grid() != b.grid() || a.circle_ != b.circle_) throw domain_error("mix: measures on different grids");
        MeasureCDF m(a.grid(), a.circle_);
        for (std::size_t i = 0; i < m.F_.size(); ++i) m.F_[i] = wa * a.F_[i] + wb * b.F_[i];
        m.atoms_.reserve(a.atoms_.size() + b.atoms_.size());
        for (const auto& x : a.atoms_) m.atoms_.push_back({x.x, wa * x.mass});
        for (const auto& x : b.atoms_) m.atoms_.push_back({x.x, wb * x.mass});
        m.normalize_atoms();
        m.fold_atoms();
        return m;
    }

    // internal: used by pushforwards
    static MeasureCDF assemble(std::vector<double> F, std::vector<Atom> atoms, bool circle) {
        MeasureCDF m(int(F.size()) - 1, circle);
        F[0] = 0.0;
        for (std::size_t i = 1; i < F.size(); ++i) F[i] = std::max(F[i], F[i - 1]);
        m.F_ = std::move(F);
        m.atoms_ = std::move(atoms);
        m.normalize_atoms();
        m.fold_atoms();
        return m;
    }

private:
    static int check_grid(int G) {
        if (G < 2 || (G & (G - 1)) != 0) throw config_error("measure grid size must be a power of two (>= 2)");
        return G;
    }

    // log-odds: both endpoints are at infinity, so nearness there is relative
    static double log_odds(double x) { return std::log(x) - std::log1p(-x); }

    void merge_excess(std::size_t cap) {
        if (atoms_.size() <= cap) return;
        const std::size_t n = atoms_.size();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::nth_element(order.begin(), order.begin() + long(n - cap), order.end(),
                         [&](std::size_t i, std::size_t j) { return atoms_[i].mass < atoms_[j].mass; });
        std::vector<char> gone(n, 0);
        for (std::size_t k = 0; k < n - cap; ++k) gone[order[k]] = 1;
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < n; ++i)
            if (!gone[i]) kept.push_back(i);
        std::vector<double> add(n, 0.0);
        std::size_t r = 0;  // first kept index >= i
        for (std::size_t i = 0; i < n; ++i) {
            while (r < kept.size() && kept[r] < i) ++r;
            if (!gone[i]) continue;
            std::size_t to;
            if (r == kept.size()) to = kept.back();
            else if (r == 0) to = kept.front();
            else {
                const double u = log_odds(atoms_[i].x);
                to = u - log_odds(atoms_[kept[r - 1]].x) <= log_odds(atoms_[kept[r]].x) - u ? kept[r - 1] : kept[r];
            }
            add[to] += atoms_[i].mass;
        }
        std::vector<Atom> out;
        out.reserve(cap);
        for (std::size_t i : kept) out.push_back({atoms_[i].x, atoms_[i].mass + add[i]});
        atoms_ = std::move(out);
        refresh();
    }

    // sort, merge coincident atoms (relative tolerance near interval endpoints), rebuild tables
    void normalize_atoms() {
        std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
        std::vector<Atom> out;
        out.reserve(atoms_.size());
        for (const auto& a : atoms_) {
            if (!(a.mass > 0)) continue;
            if (!out.empty()) {
                Atom& b = out.back();
                // Interval atoms pile up geometrically at the endpoints, so the tolerance is relative to
                // the distance from the endpoint; near 1 that distance carries absolute rounding.
                const double near = std::min(std::min(b.x, 1.0 - b.x), std::min(a.x, 1.0 - a.x));
                const double tol =
                    circle_ ? 1e-13
                            : std::max(1e-3 * near, a.x > 0.5 ? 8 * std::numeric_limits<double>::epsilon() : 0.0);
                if (a.x - b.x <= tol) {
                    b.x = (b.x * b.mass + a.x * a.mass) / (b.mass + a.mass);
                    b.mass += a.mass;
                    continue;
                }
            }
            out.push_back(a);
        }
        if (circle_ && out.size() > 1 && out.front().x + 1.0 - out.back().x <= 1e-13) {
            out.front().mass += out.back().mass;
            out.pop_back();
        }
        atoms_ = std::move(out);
        refresh();
    }

    void refresh() {
        atom_cum_.assign(atoms_.size() + 1, 0.0);
        for (std::size_t i = 0; i < atoms_.size(); ++i) atom_cum_[i + 1] = atom_cum_[i] + atoms_[i].mass;
        const int G = grid();
        bp_x_.clear();
        bp_l_.clear();
        bp_r_.clear();
        bp_x_.reserve(std::size_t(G) + 1 + atoms_.size());
        std::size_t a = 0;
        double below = 0.0;
        auto emit = [&](double x) {
            double here = 0.0;
            while (a < atoms_.size() && atoms_[a].x <= x) here += atoms_[a++].mass;
            const double c = cont(x);
            bp_x_.push_back(x);
            bp_l_.push_back(c + below);
            below += here;
            bp_r_.push_back(c + below);
        };
        for (int i = 0; i <= G; ++i) {
            const double node = double(i) / G;
            while (a < atoms_.size() && atoms_[a].x < node) emit(atoms_[a].x);
            emit(node);
        }
    }

    std::vector<double> F_;
    std::vector<Atom> atoms_;
    std::vector<double> atom_cum_;
    std::vector<double> bp_x_, bp_l_, bp_r_;
    bool circle_ = true;
};

inline double sup_cdf_distance(const MeasureCDF& a, const MeasureCDF& b) {
    double d = 0.0;
    for (const auto* m : {&a, &b})
        for (double x : m->breakpoints()) {
            d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
            d = std::max(d, std::abs(a.cdf_left(x) - b.cdf_left(x)));
        }
    return d;
}

// Integral of psi against nu: three-point Gauss-Legendre on every grid cell, plus the atoms.
template <class Psi>
double integrate(const MeasureCDF& nu, Psi&& psi) {
    static constexpr double node = 0.7745966692414834, w0 = 8.0 / 18.0, w1 = 5.0 / 18.0;
    KahanSum s;
    const int G = nu.grid();
    const double h = nu.step();
    for (int i = 0; i < G; ++i) {
        const double m = nu.cell_mass(i);
        if (m == 0.0) continue;
        const double c = (i + 0.5) * h;
        s.add(m * (w0 * psi(c) + w1 * (psi(c - 0.5 * h * node) + psi(c + 0.5 * h * node))));
    }
    for (const auto& a : nu.atoms()) s.add(a.mass * psi(a.x));
    return s.value();
}

// ---------------------------------------------------------------------------
// Pushforwards and the diffusion operator

namespace detail {

// Preimages of the grid nodes, lifted for circle maps so that pre[G] = pre[0] + 1.
inline std::vector<double> node_preimages(const Diffeo& h, int G) {
    std::vector<double> pre(std::size_t(G) + 1);
    for (int i = 0; i <= G; ++i) {
        const double x = double(i) / G;
        pre[std::size_t(i)] = h.is_circle() ? h.lift_inv(x) : h.eval_inv(x);
    }
    if (h.is_circle()) pre[std::size_t(G)] = pre[0] + 1.0;
    for (int i = 1; i <= G; ++i) pre[std::size_t(i)] = std::max(pre[std::size_t(i)], pre[std::size_t(i) - 1]);
    return pre;
}

// adds weight * h_*(continuous part of nu) at the grid nodes
inline void push_continuous(const MeasureCDF& nu, const std::vector<double>& pre, double weight,
                            std::vector<double>& out) {
    const int G = nu.grid();
    if (nu.circle()) {
        const double base = nu.lifted_cont(pre[0]);
        for (int i = 1; i < G; ++i) out[std::size_t(i)] += weight * (nu.lifted_cont(pre[std::size_t(i)]) - base);
        out[std::size_t(G)] += weight * nu.continuous_mass();
    } else {
        for (int i = 0; i <= G; ++i) out[std::size_t(i)] += weight * nu.cont(pre[std::size_t(i)]);
    }
}

inline void push_atoms(const MeasureCDF& nu, const Diffeo& h, double weight, std::vector<Atom>& out) {
    for (const auto& a : nu.atoms()) out.push_back({h(a.x), weight * a.mass});
}

}  // namespace detail

inline MeasureCDF pushforward(const MeasureCDF& nu, const Diffeo& h) {
    if (h.is_circle() != nu.circle()) throw domain_error("pushforward: circle/interval mismatch");
    std::vector<double> F(std::size_t(nu.grid()) + 1, 0.0);
    detail::push_continuous(nu, detail::node_preimages(h, nu.grid()), 1.0, F);
    std::vector<Atom> atoms;
    detail::push_atoms(nu, h, 1.0, atoms);
    return MeasureCDF::assemble(std::move(F), std::move(atoms), nu.circle());
}

// mu * nu with the node preimages of every generator computed once.
class Diffusion {
public:
    Diffusion(GeneratorMeasure mu, int G) : mu_(std::move(mu)), G_(G) {
        for (const auto& g : mu_.generators) pre_.push_back(detail::node_preimages(g, G));
    }
    const GeneratorMeasure& measure() const { return mu_; }
    MeasureCDF operator()(const MeasureCDF& nu) const {
        if (nu.grid() != G_) throw domain_error("diffusion: grid size mismatch");
        if (nu.circle() != mu_.circle()) throw domain_error("diffusion: circle/interval mismatch");
        std::vector<double> F(std::size_t(G_) + 1, 0.0);
        std::vector<Atom> atoms;
        atoms.reserve(nu.atoms().size() * mu_.size());
        for (std::size_t k = 0; k < mu_.size(); ++k) {
            detail::push_continuous(nu, pre_[k], mu_.weights[k], F);
            detail::push_atoms(nu, mu_.generators[k], mu_.weights[k], atoms);
        }
        return MeasureCDF::assemble(std::move(F), std::move(atoms), nu.circle());
    }

private:
    GeneratorMeasure mu_;
    int G_;
    std::vector<std::vector<double>> pre_;
};

inline MeasureCDF diffuse(const MeasureCDF& nu, const GeneratorMeasure& mu) { return Diffusion(mu, nu.grid())(nu); }

// D psi(x) = sum_g mu(g) psi(g(x)), the operator dual to diffusion.
template <class Psi>
double diffusion_operator(const GeneratorMeasure& mu, Psi&& psi, double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) s += mu.weights[k] * psi(mu.generators[k](x));
    return s;
}

// ---------------------------------------------------------------------------
// Stationary measures

struct StationaryReport {
    MeasureCDF measure;
    double residual = 1.0;  // sup-CDF distance between nu and mu * nu
    long iterations = 0;    // Cesaro terms
    bool converged = false;
    long polish_steps = 0;
};

// Cesaro averages of mu^n * nu0 until the residual drops below tol. Optional polishing then
// iterates mu * . from the average and keeps the measure with the smallest residual; it helps
// when the discretized operator contracts, and costs nothing otherwise.
inline StationaryReport solve_stationary(const GeneratorMeasure& mu, const MeasureCDF& nu0, double tol,
                                         long max_iter, long polish_iters = 0) {
    if (!(tol > 0)) throw config_error("solve_stationary: tol must be positive");
    if (max_iter < 1) throw config_error("solve_stationary: max_iter must be positive");
    const Diffusion D(mu, nu0.grid());
    StationaryReport r;
    MeasureCDF eta = nu0, avg = nu0;
    long next_check = 1;
    for (long N = 1;; ++N) {
        if (N >= next_check || N == max_iter) {
            r.residual = sup_cdf_distance(D(avg), avg);
            r.iterations = N;
            if (r.residual < tol) {
                r.converged = true;
                break;
            }
            if (N >= max_iter) break;
            next_check = N + std::max<long>(1, N / 64);
        }
        eta = D(eta);
        avg = MeasureCDF::mix(avg, double(N) / double(N + 1), eta, 1.0 / double(N + 1));
    }
    r.measure = avg;
    MeasureCDF cur = avg;
    for (long k = 0; k < polish_iters; ++k) {
        MeasureCDF next = D(cur);
        const double res = sup_cdf_distance(next, cur);
        if (res < r.residual) {
            r.residual = res;
            r.measure = cur;
            r.polish_steps = k;
        }
        cur = std::move(next);
    }
    if (r.residual < tol) r.converged = true;
    return r;
}

inline double stationarity_residual(const GeneratorMeasure& mu, const MeasureCDF& nu) {
    return sup_cdf_distance(diffuse(nu, mu), nu);
}

struct UniquenessReport {
    double distance = 1.0;
    bool conclusive = false;  // both solves converged
    bool unique = false;      // conclusive and distance < tol
    StationaryReport a, b;
};

inline UniquenessReport check_uniqueness(const GeneratorMeasure& mu, const MeasureCDF& nu_a, const MeasureCDF& nu_b,
                                         double tol, double solve_tol, long max_iter, long polish_iters = 0) {
    UniquenessReport r;
    r.a = solve_stationary(mu, nu_a, solve_tol, max_iter, polish_iters);
    r.b = solve_stationary(mu, nu_b, solve_tol, max_iter, polish_iters);
    r.distance = sup_cdf_distance(r.a.measure, r.b.measure);
    r.conclusive = r.a.converged && r.b.converged;
    r.unique = r.conclusive && r.distance < tol;
    return r;
}

// ---------------------------------------------------------------------------
// Arcs carrying mass

// Largest mass of a closed arc (interval) of length len.
inline double max_arc_mass(const MeasureCDF& nu, double len) {
    double best = 0.0;
    auto consider = [&](double x) {
        if (!nu.circle()) x = std::clamp(x, 0.0, std::max(0.0, 1.0 - len));
        best = std::max(best, nu.lifted(x + len) - nu.lifted_left(x));
    };
    for (double b : nu.breakpoints()) {
        consider(b);
        consider(b - len);
    }
    return std::min(best, nu.total_mass());
}

struct Arc {
    double start = 0.0;
    double length = 1.0;
};

// Shortest closed arc carrying mass at least p, with starts at breakpoints (exact to one cell).
inline Arc smallest_arc(const MeasureCDF& nu, double p) {
    Arc best;
    best.length = std::numeric_limits<double>::infinity();
    for (double x : nu.breakpoints()) {
        const double end = nu.lifted_inverse(nu.lifted_left(x) + p);
        if (!nu.circle() && end > 1.0) continue;
        if (end - x < best.length) best = {x, std::max(0.0, end - x)};
    }
    return best;
}

// inf of nu(I) over arcs of length >= 1 - delta, i.e. 1 - the largest mass of an open arc of length delta.
inline double alpha_nu(const MeasureCDF& nu, double delta) {
    if (!(delta > 0 && delta < 1)) throw domain_error("alpha_nu: delta must lie in (0,1)");
    if (!nu.circle()) throw domain_error("alpha_nu: circle measure required");
    double sup = 0.0;
    for (double b : nu.breakpoints())
        for (double x : {b, b - delta}) sup = std::max(sup, nu.lifted_left(x + delta) - nu.lifted(x));
    return nu.total_mass() - sup;
}

struct CollapseReport {
    double fraction = 0.0;             // words whose (1-eps)-arc is at most eps long at the end
    std::vector<double> final_length;  // per word
    std::vector<long> checkpoints;
    std::vector<double> median_max_mass;  // median over words of the largest eps-arc mass
};

inline std::vector<long> checkpoints_up_to(long length, std::vector<long> marks = {10, 25, 50, 100}) {
    std::vector<long> out;
    for (long m : marks)
        if (m < length) out.push_back(m);
    out.push_back(length);
    return out;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + long(k), v.end());
    if (v.size() % 2) return v[k];
    const double hi = v[k];
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + long(k)));
}

inline double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const std::size_t i = std::size_t(pos);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (pos - double(i)) * (v[i + 1] - v[i]);
}

// Pushes a stationary nu through sampled products g_1 o ... o g_n and records how much of it
// gathers in a short arc.
inline CollapseReport dirac_collapse(const GeneratorMeasure& mu, const MeasureCDF& nu, long words, long length,
                                     double eps, std::uint64_t seed = 1) {
    if (!(eps > 0 && eps < 0.5)) throw domain_error("dirac_collapse: eps must lie in (0, 1/2)");
    const double res = stationarity_residual(mu, nu);
    if (!(res < 1e-3))
        throw precondition_error("dirac_collapse: measure is not stationary (residual " + std::to_string(res) + ")");
    CollapseReport r;
    r.checkpoints = checkpoints_up_to(length);
    std::vector<std::vector<double>> maxmass(r.checkpoints.size());
    long collapsed = 0;
    for (long t = 0; t < words; ++t) {
        const auto w = sample_word(mu.law(), length, trial_seed(seed, std::uint64_t(t))).word;
        for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
            const MeasureCDF pushed = pushforward(nu, left_product(mu.generators, w, std::size_t(r.checkpoints[c])));
            maxmass[c].push_back(max_arc_mass(pushed, eps));
            if (c + 1 == r.checkpoints.size()) {
                const double len = smallest_arc(pushed, 1.0 - eps).length;
                r.final_length.push_back(len);
                collapsed += len <= eps;
            }
        }
    }
    r.fraction = words > 0 ? double(collapsed) / double(words) : 0.0;
    for (auto& v : maxmass) r.median_max_mass.push_back(median_of(v));
    return r;
}

// ---------------------------------------------------------------------------
// Contraction coefficient

struct ContractionReport {
    double c = 1.0;
    Arc I, J;  // h maps the closed complement of I onto J
    double grid_step = 0.0;
};

// min over grid arcs I of max(|I|, 1 - |h(I)|), found per start by bisection on the end.
inline ContractionReport contraction_coefficient(const Diffeo& h, int G = default_grid) {
    if (!h.is_circle()) throw domain_error("contraction_coefficient: circle map required");
    std::vector<double> H(2 * std::size_t(G) + 1);
    for (int i = 0; i <= G; ++i) H[std::size_t(i)] = h.lift(double(i) / G);
    H[std::size_t(G)] = H[0] + 1.0;
    for (int i = 1; i <= G; ++i) H[std::size_t(G + i)] = H[std::size_t(i)] + 1.0;
    ContractionReport r;
    r.grid_step = 1.0 / G;
    auto value = [&](int i, int j) { return std::max(double(j - i) / G, 1.0 - (H[std::size_t(j)] - H[std::size_t(i)])); };
    for (int i = 0; i < G; ++i) {
        int lo = i, hi = i + G;  // value(i, j) is decreasing then increasing in j
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            if (double(mid - i) / G >= 1.0 - (H[std::size_t(mid)] - H[std::size_t(i)]))
                hi = mid;
            else
                lo = mid;
        }
        for (int j : {lo, hi}) {
            const double v = value(i, j);
            if (v < r.c) {
                r.c = v;
                r.I = {double(i) / G, double(j - i) / G};
                r.J = {frac(H[std::size_t(j)]), 1.0 - (H[std::size_t(j)] - H[std::size_t(i)])};
            }
        }
    }
    return r;
}

struct ContractionStats {
    std::vector<long> checkpoints;
    std::vector<double> median, q90;
    bool nonincreasing = true;  // medians, up to one grid step
};

inline ContractionStats contraction_along_words(const GeneratorMeasure& mu, long words, long length,
                                                std::uint64_t seed = 1, int G = default_grid) {
    ContractionStats s;
    s.checkpoints = checkpoints_up_to(length);
    std::vector<std::vector<double>> cs(s.checkpoints.size());
    for (long t = 0; t < words; ++t) {
        const auto w = sample_word(mu.law(), length, trial_seed(seed, std::uint64_t(t))).word;
        for (std::size_t c = 0; c < s.checkpoints.size(); ++c)
            cs[c].push_back(
                contraction_coefficient(left_product(mu.generators, w, std::size_t(s.checkpoints[c])), G).c);
    }
    for (std::size_t c = 0; c < cs.size(); ++c) {
        s.median.push_back(median_of(cs[c]));
        s.q90.push_back(quantile_of(cs[c], 0.9));
        if (c > 0 && s.median[c] > s.median[c - 1] + 1.0 / G) s.nonincreasing = false;
    }
    return s;
}

// ---------------------------------------------------------------------------
// D_eta membership and fixed-point inventories

struct DEtaReport {
    bool member = false;
    Arc I, J;                     // witnesses when member
    double sup_deriv = 0.0;       // of g on the closed complement of I, for the witness
    long size_ok = 0;             // candidate arcs whose complement image fits in eta
    long size_and_separation_ok = 0;
};

// Searches grid arcs I of length eta (rounded down to the grid) such that the image J of the
// complement has length <= eta, sits at distance >= 2 eta from I, and g' < 1 off I.
inline DEtaReport d_eta_membership(const Diffeo& g, double eta, int G = default_grid) {
    if (!(eta > 0 && eta < 0.25)) throw domain_error("d_eta_membership: eta must lie in (0, 1/4)");
    if (!g.is_circle()) throw domain_error("d_eta_membership: circle map required");
    const int k = int(std::floor(eta * G));
    DEtaReport r;
    if (k < 1) return r;
    const double len = double(k) / G;
    std::vector<double> H(2 * std::size_t(G) + 1), D(2 * std::size_t(G) + 1);
    for (int i = 0; i <= G; ++i) {
        H[std::size_t(i)] = g.lift(double(i) / G);
        D[std::size_t(i)] = g.deriv(double(i) / G);
    }
    H[std::size_t(G)] = H[0] + 1.0;
    for (int i = 1; i <= G; ++i) {
        H[std::size_t(G + i)] = H[std::size_t(i)] + 1.0;
        D[std::size_t(G + i)] = D[std::size_t(i)];
    }
    // sliding maximum of g' over nodes i+k .. i+G (the closed complement of I)
    std::vector<int> dq;
    std::size_t head = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 2 * G; ++j) {
        while (dq.size() > head && D[std::size_t(dq.back())] <= D[std::size_t(j)]) dq.pop_back();
        dq.push_back(j);
        const int i = j - G;  // window [i+k, i+G] ends at j
        if (i < 0) continue;
        if (i >= G) break;
        while (dq[head] < i + k) ++head;
        const double sup = D[std::size_t(dq[head])];
        const double jlen = 1.0 - (H[std::size_t(i + k)] - H[std::size_t(i)]);
        if (jlen > eta) continue;
        ++r.size_ok;
        const double a = double(i) / G, b = frac(H[std::size_t(i + k)]);
        const double gap_after = frac(b - (a + len)), gap_before = frac(a - (b + jlen));
        const bool overlap = frac(b - a) < len || frac(a - b) < jlen;
        const double dist = overlap ? 0.0 : std::min(gap_after, gap_before);
        if (dist < 2 * eta) continue;
        ++r.size_and_separation_ok;
        if (sup < 1.0 && sup < best) {
            best = sup;
            r.member = true;
            r.I = {a, len};
            r.J = {b, jlen};
            r.sup_deriv = sup;
        }
    }
    return r;
}

enum class FixedKind { contracting, dilating, undecided };
enum class Topology { attracting, repelling, semi };

inline const char* fixed_kind_name(FixedKind k) {
    switch (k) {
        case FixedKind::contracting: return "contracting";
        case FixedKind::dilating: return "dilating";
        default: return "undecided";
    }
}

struct FixedPoint {
    double x = 0.0;
    double derivative = 1.0;
    FixedKind kind = FixedKind::undecided;
    Topology topology = Topology::semi;
};

// All fixed points, found where the lifted displacement lift(x) - x crosses an integer between
// grid nodes and refined by bisection. The lifted displacement moves by less than 1 per cell, so a
// cell holds at most one crossing; strong repellers make it move by almost that much.
inline std::vector<FixedPoint> fixed_point_inventory(const Diffeo& h, int G = default_grid) {
    auto L = [&](double x) { return h.is_circle() ? h.lift(x) - x : h(x) - x; };
    std::vector<double> D(std::size_t(G) + 1);
    for (int i = 0; i <= G; ++i) D[std::size_t(i)] = L(double(i) / G);
    if (h.is_circle()) D[std::size_t(G)] = D[0];
    std::vector<FixedPoint> out;
    auto classify = [&](double x, double before, double after) {
        FixedPoint p;
        p.x = x;
        p.derivative = h.deriv(x);
        p.kind = p.derivative < 1 - hyperbolicity_margin   ? FixedKind::contracting
                 : p.derivative > 1 + hyperbolicity_margin ? FixedKind::dilating
                                                           : FixedKind::undecided;
        p.topology = before > 0 && after < 0   ? Topology::attracting
                     : before < 0 && after > 0 ? Topology::repelling
                                               : Topology::semi;
        out.push_back(p);
    };
    const int last = h.is_circle() ? G - 1 : G;
    for (int i = 0; i <= last; ++i) {
        const double a = D[std::size_t(i)];
        if (a == std::round(a)) {
            const double prev = i > 0 ? D[std::size_t(i) - 1] : (h.is_circle() ? D[std::size_t(G) - 1] : a);
            const double next = i < G ? D[std::size_t(i) + 1] : a;
            classify(double(i) / G, prev - a, next - a);
            continue;
        }
        if (i == G) break;
        const double b = D[std::size_t(i) + 1];
        if (b == std::round(b)) continue;  // the next node is the fixed point
        const double k = std::ceil(std::min(a, b));
        if (!(k < std::max(a, b))) continue;
        const double x = bisect([&](double t) { return L(t) - k; }, double(i) / G, double(i + 1) / G);
        classify(x, a - k, b - k);
    }
    return out;
}

struct MorseSmaleReport {
    bool premise = false;  // g and g^-1 both in D_eta
    std::vector<FixedPoint> inventory;
    bool two_hyperbolic = false;  // exactly one contracting and one dilating point
    bool ok() const { return !premise || two_hyperbolic; }
};

inline MorseSmaleReport morse_smale_check(const Diffeo& g, double eta, int G = default_grid) {
    MorseSmaleReport r;
    r.premise = d_eta_membership(g, eta, G).member && d_eta_membership(g.inverse(), eta, G).member;
    r.inventory = fixed_point_inventory(g, G);
    int c = 0, d = 0;
    for (const auto& p : r.inventory) {
        c += p.kind == FixedKind::contracting;
        d += p.kind == FixedKind::dilating;
    }
    r.two_hyperbolic = r.inventory.size() == 2 && c == 1 && d == 1;
    return r;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents

struct LyapunovReport {
    double quadrature = 0.0;
    double quadrature_error = 0.0;  // three-point Gauss against midpoint
    double birkhoff_mean = 0.0;
    double birkhoff_se = 0.0;
    long words = 0, length = 0;
    bool agree = false;  // within two joint standard errors
    double ci99_lo() const { return birkhoff_mean - 2.5758293035489004 * birkhoff_se; }
    double ci99_hi() const { return birkhoff_mean + 2.5758293035489004 * birkhoff_se; }
};

inline void require_positive_derivative(double logd) {
    if (!std::isfinite(logd)) throw domain_error("lyapunov: nonpositive derivative (broken map?)");
}

// sum_g mu(g) * integral of log g' against nu
inline std::pair<double, double> lyapunov_quadrature(const GeneratorMeasure& mu, const MeasureCDF& nu) {
    double q = 0.0, mid = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const Diffeo& g = mu.generators[k];
        auto psi = [&](double x) {
            const double v = g.log_deriv(x);
            require_positive_derivative(v);
            return v;
        };
        q += mu.weights[k] * integrate(nu, psi);
        KahanSum m;
        for (int i = 0; i < nu.grid(); ++i) m.add(nu.cell_mass(i) * psi((i + 0.5) * nu.step()));
        for (const auto& a : nu.atoms()) m.add(a.mass * psi(a.x));
        mid += mu.weights[k] * m.value();
    }
    return {q, std::abs(q - mid)};
}

// Per-word (1/n) log h_n'(x) along the forward walk with x drawn from nu.
inline std::pair<double, double> lyapunov_birkhoff(const GeneratorMeasure& mu, const MeasureCDF& nu, long words,
                                                   long length, std::uint64_t seed = 1) {
    if (words < 2 || length < 1) throw config_error("lyapunov: need at least two words of positive length");
    KahanSum sum, sq;
    std::vector<double> per(static_cast<std::size_t>(words));
    for (long t = 0; t < words; ++t) {
        const std::uint64_t ts = trial_seed(seed, std::uint64_t(t));
        const auto w = sample_word(mu.law(), length, ts).word;
        Rng rng = Rng::substream(ts, 1);
        double x = nu.quantile(rng.uniform());
        KahanSum acc;
        for (int k : w) {
            const Diffeo& g = mu.generators[std::size_t(k)];
            const double v = g.log_deriv(x);
            require_positive_derivative(v);
            acc.add(v);
            x = g(x);
        }
        per[std::size_t(t)] = acc.value() / double(length);
        sum.add(per[std::size_t(t)]);
    }
    const double mean = sum.value() / double(words);
    for (double v : per) sq.add((v - mean) * (v - mean));
    return {mean, std::sqrt(sq.value() / double(words - 1) / double(words))};
}

inline LyapunovReport lyapunov_exponent(const GeneratorMeasure& mu, const MeasureCDF& nu, long words, long length,
                                        std::uint64_t seed = 1) {
    const double res = stationarity_residual(mu, nu);
    if (!(res < 1e-3))
        throw precondition_error("lyapunov: measure is not stationary (residual " + std::to_string(res) + ")");
    LyapunovReport r;
    std::tie(r.quadrature, r.quadrature_error) = lyapunov_quadrature(mu, nu);
    std::tie(r.birkhoff_mean, r.birkhoff_se) = lyapunov_birkhoff(mu, nu, words, length, seed);
    r.words = words;
    r.length = length;
    const double joint = std::hypot(r.birkhoff_se, r.quadrature_error);
    r.agree = std::abs(r.quadrature - r.birkhoff_mean) <= 2 * joint;
    return r;
}

// ---------------------------------------------------------------------------
// Interval actions

struct EscapeReport {
    std::vector<double> trace;  // mass of [delta, 1-delta] after each diffusion step (trace[0] = nu0)
    double final_mass = 1.0;
    double left_mass = 0.0, right_mass = 0.0;  // of [0, delta) and (1-delta, 1] at the end
    bool escaped = false;                      // final_mass < 0.1
};

inline EscapeReport interval_escape(const GeneratorMeasure& mu, const MeasureCDF& nu0, long iters,
                                    double delta = 0.05) {
    if (mu.circle() || nu0.circle()) throw domain_error("interval_escape: interval maps and measure required");
    if (!mu.symmetric) throw precondition_error("interval_escape: the law must be symmetric");
    for (const auto& g : mu.generators)
        if (std::abs(g(0.0)) > 1e-12 || std::abs(g(1.0) - 1.0) > 1e-12)
            throw precondition_error("interval_escape: generators must fix 0 and 1");
    for (double x : linspace(0.0, 1.0, 257)) {
        if (x == 0.0 || x == 1.0) continue;
        bool moved = false;
        for (const auto& g : mu.generators) moved = moved || std::abs(g(x) - x) > 1e-12;
        if (!moved) throw precondition_error("interval_escape: the generators share an interior fixed point");
    }
    const Diffusion D(mu, nu0.grid());
    EscapeReport r;
    auto middle = [&](const MeasureCDF& m) { return m.cdf(1.0 - delta) - m.cdf_left(delta); };
    MeasureCDF nu = nu0;
    r.trace.push_back(middle(nu));
    for (long n = 0; n < iters; ++n) {
        nu = D(nu);
        r.trace.push_back(middle(nu));
    }
    r.final_mass = r.trace.back();
    r.left_mass = nu.cdf_left(delta);
    r.right_mass = nu.total_mass() - nu.cdf(1.0 - delta);
    r.escaped = r.final_mass < 0.1;
    return r;
}

struct SymmetryIntegral {
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;     // lhs >= rhs (1 - 1e-9)
    bool equality = false;  // |f(t) - t| < 1e-9
};

// integral over [0,t] of f + f^-1 against t^2, composite Simpson on 2^10 panels
inline SymmetryIntegral symmetry_integral_check(const Diffeo& f, double t) {
    if (f.is_circle()) throw domain_error("symmetry_integral_check: interval map required");
    if (std::abs(f(0.0)) > 1e-12 || std::abs(f(1.0) - 1.0) > 1e-12)
        throw precondition_error("symmetry_integral_check: f must fix 0 and 1");
    if (!(t >= 0 && t <= 1)) throw domain_error("symmetry_integral_check: t must lie in [0,1]");
    const int n = 1 << 10;
    const double h = t / n;
    auto phi = [&](double s) { return f(s) + f.eval_inv(s); };
    KahanSum s;
    for (int i = 0; i <= n; ++i) s.add((i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * phi(i * h));
    SymmetryIntegral r;
    r.lhs = s.value() * h / 3.0;
    r.rhs = t * t;
    r.holds = r.lhs >= r.rhs * (1 - 1e-9);
    r.equality = std::abs(f(t) - t) < 1e-9;
    return r;
}

// ---------------------------------------------------------------------------
// Conjugation by the stationary CDF

struct ConjugationReport {
    GeneratorMeasure conjugated;
    std::vector<double> lipschitz;  // empirical, on grid increments
    std::vector<double> bound;      // 1/mu(g^-1), infinite when g^-1 is not in the support
    bool ok = false;                // lipschitz <= bound (1 + 1e-2) for every generator
};

// phi g phi^-1 with phi the CDF of nu, as piecewise-linear circle maps on K nodes.
inline ConjugationReport conjugate_by_cdf(const GeneratorMeasure& mu, const MeasureCDF& nu, int K = 256) {
    if (!nu.circle() || !mu.circle()) throw domain_error("conjugate_by_cdf: circle measure required");
    if (nu.atom_mass() > 1e-9) throw precondition_error("conjugate_by_cdf: measure has atoms");
    if (!(nu.min_cell_mass() > 1e-12)) throw precondition_error("conjugate_by_cdf: CDF is flat on a grid cell (support gap)");
    ConjugationReport r;
    std::vector<Diffeo> conj;
    const auto ys = linspace(0.0, 1.0, K + 1);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const Diffeo& g = mu.generators[k];
        std::vector<double> out(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) out[i] = nu.lifted(g.lift(nu.lifted_inverse(ys[i])));
        out.back() = out.front() + 1.0;
        double lip = 0.0;
        for (std::size_t i = 1; i < out.size(); ++i) {
            if (!(out[i] > out[i - 1]))
                throw precondition_error("conjugate_by_cdf: conjugate is not strictly increasing at grid resolution");
            lip = std::max(lip, (out[i] - out[i - 1]) * K);
        }
        conj.push_back(piecewise_linear(ys, out, true));
        r.lipschitz.push_back(lip);
        const double w = mu.inverse_weight(k);
        r.bound.push_back(w > 0 ? 1.0 / w : std::numeric_limits<double>::infinity());
    }
    r.ok = true;
    for (std::size_t k = 0; k < conj.size(); ++k) r.ok = r.ok && r.lipschitz[k] <= r.bound[k] * (1 + 1e-2);
    r.conjugated = GeneratorMeasure::make(std::move(conj), mu.weights);
    return r;
}

struct LipInequalityReport {
    long checks = 0;
    long violations = 0;
    double worst = -std::numeric_limits<double>::infinity();  // max of nu(gI) - nu(I)/mu(g^-1)
};

// nu(g(I)) <= nu(I) / mu(g^-1) on random grid arcs I, up to `slack`.
inline LipInequalityReport lip_inequality_check(const GeneratorMeasure& mu, const MeasureCDF& nu, long samples,
                                                double slack, std::uint64_t seed = 1) {
    LipInequalityReport r;
    Rng rng = Rng::substream(seed, 0x11b);
    const int G = nu.grid();
    for (long s = 0; s < samples; ++s) {
        const double a = double(rng.below(std::uint64_t(G))) / G;
        const double len = double(1 + rng.below(std::uint64_t(G - 1))) / G;
        const double nuI = nu.lifted(a + len) - nu.lifted_left(a);
        for (std::size_t k = 0; k < mu.size(); ++k) {
            const double w = mu.inverse_weight(k);
            if (!(w > 0)) continue;
            const Diffeo& g = mu.generators[k];
            const double ga = g.lift(a), gb = g.lift(a + len);
            const double nugI = nu.lifted(gb) - nu.lifted_left(ga);
            const double excess = nugI - nuI / w;
            r.worst = std::max(r.worst, excess);
            ++r.checks;
            r.violations += excess > slack;
        }
    }
    return r;
}

}  // namespace denjoy
