#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace carte {

/**
 * Seeded counter-based random source.
 *
 * Output n is a hash of (stream key, n), so streams can be split without
 * sharing state: derive(tag) returns an independent stream whose key mixes
 * the parent key with the tag. Same seed, same tags -> identical draws,
 * independent of how sibling streams are interleaved.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kGolden)) {}

    // Independent substream for (this stream, tag).
    Rng derive(std::uint64_t tag) const { return Rng(mix(key_ ^ mix(tag + kGolden)), 0); }

    Rng derive(std::string_view tag) const { return derive(fnv1a(tag)); }

    Rng derive(std::string_view tag, std::uint64_t a) const { return derive(tag).derive(a); }

    Rng derive(std::string_view tag, std::uint64_t a, std::uint64_t b) const {
        return derive(tag).derive(a).derive(b);
    }

    std::uint64_t next_u64() { return mix(key_ ^ (++ctr_) * kGolden); }

    // Uniform on [0,1) with 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + u01() * (hi - lo); }

    // Standard normal via Box-Muller; two uniforms per draw, no cached spare.
    double normal() {
        double u1 = u01();
        while (u1 <= 0.0) u1 = u01();
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Beta(2,2) as G1/(G1+G2) with shape-2 gammas G = -log(U*U'). Exact.
    double beta22() {
        const double g1 = -std::log(positive_u01() * positive_u01());
        const double g2 = -std::log(positive_u01() * positive_u01());
        return g1 / (g1 + g2);
    }

    // Uniform integer in [0, n) by rejection; n >= 1.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Index draw from a probability vector (entries sum to ~1).
    int categorical(const std::vector<double>& probs) {
        const double u = u01();
        double acc = 0.0;
        for (std::size_t a = 0; a < probs.size(); ++a) {
            acc += probs[a];
            if (u < acc) return static_cast<int>(a);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[bounded(i)]);
        }
    }

private:
    Rng(std::uint64_t key, std::uint64_t ctr) : key_(key), ctr_(ctr) {}

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    // splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    double positive_u01() {
        double u = u01();
        while (u <= 0.0) u = u01();
        return u;
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace carte
