#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace uq {

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Child seed for a named stream, optionally indexed. Children of distinct
// (tag, indices) are independent for any fixed master seed, so replicas and
// ensemble members can be generated in any order with identical results.
inline std::uint64_t split_seed(std::uint64_t master, std::string_view tag,
                                std::uint64_t i = 0, std::uint64_t j = 0) {
    std::uint64_t h = mix64(master ^ hash_tag(tag));
    h = mix64(h ^ (0x9e3779b97f4a7c15ULL + i));
    h = mix64(h ^ (0xc2b2ae3d27d4eb4fULL + j));
    return h;
}

// Seeded stream of doubles. Distributions are implemented by hand so that
// results are bit-stable across standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in (0,1]
    double uniform() {
        return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, no spare caching (two uniforms per draw keeps the stream
    // position a pure function of the draw count).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Fisher-Yates using bounded draws.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(static_cast<std::uint64_t>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

    // unbiased integer in [0, n)
    std::uint64_t bounded(std::uint64_t n) {
        std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = eng_();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace uq
