#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "denjoy/errors.hpp"
#include "denjoy/numeric.hpp"
#include "denjoy/rng.hpp"

namespace denjoy {

// Polya-urn walk on N^d: coordinate i grows with probability (1 + n_i) / (n_1 + ... + n_d + d).
struct UrnWalk {
    int d = 2;
    std::vector<long> state;

    explicit UrnWalk(int dim) : d(dim), state(std::size_t(dim), 0) {
        if (dim < 1) throw config_error("urn walk: dimension must be at least 1");
    }
    long total() const {
        long s = 0;
        for (long v : state) s += v;
        return s;
    }
    double probability(int i) const { return double(1 + state[std::size_t(i)]) / double(total() + d); }
};

inline int urn_step(UrnWalk& w, Rng& rng) {
    // a uniform draw among total + d balls; ball b belongs to coordinate i when it falls in its block
    std::uint64_t b = rng.below(std::uint64_t(w.total() + w.d));
    int i = 0;
    while (b >= std::uint64_t(1 + w.state[std::size_t(i)])) {
        b -= std::uint64_t(1 + w.state[std::size_t(i)]);
        ++i;
    }
    ++w.state[std::size_t(i)];
    return i;
}

struct ArrivalDistribution {
    int d = 2;
    int k = 0;
    bool exact = false;          // computed in rational arithmetic
    bool exact_uniform = false;  // exact, and every probability equals 1 / C(k+d-1, d-1)
    std::vector<std::pair<std::vector<int>, double>> probs;  // lexicographic in state

    double sum() const {
        KahanSum s;
        for (const auto& p : probs) s.add(p.second);
        return s.value();
    }
    double max_deviation_from_uniform() const {
        const double u = 1.0 / binomial(k + d - 1, d - 1);
        double m = 0.0;
        for (const auto& p : probs) m = std::max(m, std::abs(p.second - u));
        return m;
    }
};

inline constexpr int arrival_step_guard = 64;

namespace detail {

inline std::uint64_t pack_state(const std::vector<int>& s) {
    std::uint64_t key = 0;
    for (int v : s) key = (key << 7) | std::uint64_t(v);
    return key;
}
inline std::vector<int> unpack_state(std::uint64_t key, int d) {
    std::vector<int> s(static_cast<std::size_t>(d));
    for (int j = d - 1; j >= 0; --j, key >>= 7) s[std::size_t(j)] = int(key & 0x7f);
    return s;
}

template <class T, class Add>
std::unordered_map<std::uint64_t, T> urn_layers(int d, int k, Add add) {
    std::unordered_map<std::uint64_t, T> layer{{pack_state(std::vector<int>(std::size_t(d), 0)), T(1)}};
    for (int step = 0; step < k; ++step) {
        std::unordered_map<std::uint64_t, T> next;
        next.reserve(layer.size() * 2);
        for (const auto& [key, p] : layer) {
            const auto s = unpack_state(key, d);
            for (int i = 0; i < d; ++i) {
                auto t = s;
                ++t[std::size_t(i)];
                add(next[pack_state(t)], p * T(1 + s[std::size_t(i)]) / T(step + d));
            }
        }
        layer = std::move(next);
    }
    return layer;
}

}  // namespace detail

// Exact law of the urn walk after k steps. Rational arithmetic whenever the table stays small,
// otherwise doubles (each cell is a sum of at most d terms, so no compensation is needed).
inline ArrivalDistribution exact_arrival_distribution(int d, int k) {
    if (d < 1 || d > 9) throw config_error("urn distribution: dimension must lie in [1, 9]");
    if (k < 0 || k > arrival_step_guard)
        throw config_error("urn distribution: k must lie in [0, 64] (table size guard)");
    ArrivalDistribution out;
    out.d = d;
    out.k = k;
    const double states = binomial(k + d, d);
    if (states <= 6e4) {
        using boost::multiprecision::cpp_rational;
        auto layer = detail::urn_layers<cpp_rational>(d, k, [](cpp_rational& a, const cpp_rational& b) { a += b; });
        const cpp_rational uniform(1, static_cast<long long>(binomial(k + d - 1, d - 1)));
        out.exact = true;
        out.exact_uniform = true;
        for (const auto& [key, p] : layer) {
            out.exact_uniform &= p == uniform;
            out.probs.emplace_back(detail::unpack_state(key, d), p.convert_to<double>());
        }
    } else {
        auto layer = detail::urn_layers<double>(d, k, [](double& a, double b) { a += b; });
        for (const auto& [key, p] : layer) out.probs.emplace_back(detail::unpack_state(key, d), p);
    }
    std::sort(out.probs.begin(), out.probs.end());
    return out;
}

struct WordLaw {
    enum class Kind { urn, bernoulli } kind = Kind::bernoulli;
    int d = 2;                    // urn dimension
    std::vector<double> weights;  // bernoulli weights over generator indices

    static WordLaw urn(int d) { return {Kind::urn, d, {}}; }
    static WordLaw bernoulli(std::vector<double> w) {
        KahanSum s;
        for (double x : w) {
            if (!(x > 0)) throw config_error("bernoulli law: weights must be positive");
            s.add(x);
        }
        if (w.empty() || std::abs(s.value() - 1.0) > 1e-12) throw config_error("bernoulli law: weights must sum to 1");
        return {Kind::bernoulli, int(w.size()), std::move(w)};
    }
    int alphabet() const { return kind == Kind::urn ? d : int(weights.size()); }
    std::string tag() const {
        if (kind == Kind::urn) return "urn(" + std::to_string(d) + ")";
        std::string s = "bernoulli(";
        for (std::size_t i = 0; i < weights.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", weights[i]);
            s += buf;
        }
        return s + ")";
    }
};

// A word in application order: word[0] is applied first.
struct WordSample {
    std::vector<int> word;
    std::uint64_t seed = 0;
    WordLaw law;
};

inline WordSample sample_word(const WordLaw& law, long length, std::uint64_t seed) {
    if (length < 1) throw config_error("sample_word: length must be at least 1");
    WordSample w{{}, seed, law};
    w.word.reserve(std::size_t(length));
    Rng rng = Rng::substream(seed, 0);
    if (law.kind == WordLaw::Kind::urn) {
        UrnWalk walk(law.d);
        for (long n = 0; n < length; ++n) w.word.push_back(urn_step(walk, rng));
    } else {
        std::vector<double> cum;
        KahanSum s;
        for (double x : law.weights) cum.push_back((s.add(x), s.value()));
        for (long n = 0; n < length; ++n) w.word.push_back(int(rng.pick(cum)));
    }
    return w;
}

// Seed of trajectory `trial` in an experiment seeded by `seed`.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return substream_id(seed, trial); }

// Endpoint of an urn word, i.e. the number of times each generator occurs.
inline std::vector<int> urn_endpoint(const WordSample& w) {
    std::vector<int> c(std::size_t(w.law.alphabet()), 0);
    for (int g : w.word) ++c[std::size_t(g)];
    return c;
}

struct DriftReport {
    int d = 2;
    long visits = 0;               // (state, max-coordinate direction) pairs visited
    long max_steps = 0;            // of those, steps taken in that direction
    double frequency = 0.0;        // max_steps / visits
    double sigma = 0.0;            // binomial standard error at probability 1/d
    double min_formula = 1.0;      // smallest (1 + max) / (total + d) over visited states
    bool ok = false;
};

// Stepping in a direction of maximal coordinate happens with probability at least 1/d.
inline DriftReport diagonal_drift_check(int d, long paths, long length, std::uint64_t seed) {
    DriftReport r;
    r.d = d;
    for (long p = 0; p < paths; ++p) {
        Rng rng = Rng::substream(trial_seed(seed, std::uint64_t(p)), 0);
        UrnWalk w(d);
        for (long n = 0; n < length; ++n) {
            const long top = *std::max_element(w.state.begin(), w.state.end());
            std::vector<int> argmax;
            for (int i = 0; i < d; ++i)
                if (w.state[std::size_t(i)] == top) argmax.push_back(i);
            r.min_formula = std::min(r.min_formula, w.probability(argmax.front()));
            // one max direction per state, chosen without looking at the step
            const int probe = argmax[std::size_t(n) % argmax.size()];
            const int step = urn_step(w, rng);
            ++r.visits;
            r.max_steps += step == probe;
        }
    }
    const double p0 = 1.0 / d;
    r.frequency = r.visits ? double(r.max_steps) / double(r.visits) : 0.0;
    r.sigma = r.visits ? std::sqrt(p0 * (1 - p0) / double(r.visits)) : 0.0;
    r.ok = r.visits > 0 && r.frequency >= p0 - 3.0 * r.sigma && r.min_formula >= p0 - 1e-15;
    return r;
}

}  // namespace denjoy
