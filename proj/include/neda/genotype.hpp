#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace neda {

using Bits = std::vector<std::uint8_t>;

// Fixed-length bit vector with an optional cached fitness.
struct Genotype {
    Bits bits;
    std::optional<double> fitness;

    Genotype() = default;
    explicit Genotype(Bits b) : bits(std::move(b)) {}
    Genotype(Bits b, double f) : bits(std::move(b)), fitness(f) {}

    std::size_t size() const { return bits.size(); }
    bool evaluated() const { return fitness.has_value(); }

    bool same_bits(const Genotype& other) const { return bits == other.bits; }

    std::string to_string() const {
        std::string s;
        s.reserve(bits.size());
        for (auto b : bits) s.push_back(b ? '1' : '0');
        return s;
    }

    static Genotype from_string(std::string_view s) {
        Bits b;
        b.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw std::invalid_argument("genotype string must be binary");
            b.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        return Genotype(std::move(b));
    }
};

struct Population {
    std::vector<Genotype> members;
    std::size_t generation = 0;

    std::size_t size() const { return members.size(); }
};

inline std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
    return d;
}

inline std::size_t hamming_distance(const Genotype& a, const Genotype& b) {
    return hamming_distance(std::span(a.bits), std::span(b.bits));
}

} // namespace neda
