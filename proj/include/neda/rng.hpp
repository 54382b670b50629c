#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace neda {

// Seeded random stream with named substreams. All draws go through the
// bounded/real helpers below rather than std distributions, so a trial is
// bit-reproducible across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Derive an independent stream; adding a consumer with a new name does
    // not perturb draws from any existing stream.
    RngStream substream(std::string_view name) const {
        return RngStream(mix(seed_ ^ fnv1a(name)));
    }
    RngStream substream(std::string_view name, std::uint64_t index) const {
        return RngStream(mix(seed_ ^ fnv1a(name) ^ mix(index + 0x9e3779b97f4a7c15ull)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n), unbiased via rejection.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return static_cast<std::size_t>(x % bound);
        }
    }

    // Uniform integer in [lo, hi] inclusive.
    long uniform_int(long lo, long hi) {
        return lo + static_cast<long>(uniform_index(static_cast<std::size_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return next_double() < p; }

    std::uint8_t random_bit() { return static_cast<std::uint8_t>(next_u64() >> 63); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : s) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace neda
