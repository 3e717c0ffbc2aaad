#pragma once

// Philox4x32-10 (Salmon, Moraes, Dror, Shaw 2011) used in counter mode.
// A stream is identified by a 64-bit key; block n of the stream is the
// encryption of counter n. Substreams are keyed by substream_id(seed, index)
// so Monte Carlo results do not depend on how trajectories are scheduled.

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace denjoy {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_id(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xD2B74407B1CE6E93ull + 0x632BE59BD9B4E019ull));
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(m0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(m1) * ctr[2];
        const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

// UniformRandomBitGenerator over one Philox stream.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) : key_(key) {}
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(substream_id(seed, index));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    // 53-bit uniform in [0,1).
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = (unsigned __int128)(*this)() * n;
        auto low = std::uint64_t(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = (unsigned __int128)(*this)() * n;
                low = std::uint64_t(m);
            }
        }
        return std::uint64_t(m >> 64);
    }

    // Index drawn from a discrete law given by cumulative weights ending at 1.
    std::size_t pick(const std::vector<double>& cumulative) {
        const double u = uniform();
        for (std::size_t i = 0; i + 1 < cumulative.size(); ++i)
            if (u < cumulative[i]) return i;
        return cumulative.size() - 1;
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t blocks_used() const { return counter_; }

private:
    void refill() {
        const auto out = philox4x32_10(
            {std::uint32_t(counter_), std::uint32_t(counter_ >> 32), 0u, 0u},
            {std::uint32_t(key_), std::uint32_t(key_ >> 32)});
        ++counter_;
        buf_[1] = (std::uint64_t(out[1]) << 32) | out[0];
        buf_[0] = (std::uint64_t(out[3]) << 32) | out[2];
        have_ = 2;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int have_ = 0;
};

}  // namespace denjoy
