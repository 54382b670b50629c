#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "genotype.hpp"
#include "rng.hpp"

namespace neda {

inline Population init_population(std::size_t pop_size, std::size_t dim, RngStream& rng) {
    if (pop_size < 1 || dim < 1) throw std::invalid_argument("init_population: P and D must be >= 1");
    Population pop;
    pop.members.reserve(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) {
        Bits b(dim);
        for (auto& bit : b) bit = rng.random_bit();
        pop.members.emplace_back(std::move(b));
    }
    return pop;
}

// Tournament selection with replacement; ties go to the first-drawn member.
inline std::vector<Genotype> tournament_select(const Population& pop, std::size_t count,
                                               std::size_t tournament_size, RngStream& rng) {
    if (pop.members.empty()) throw std::invalid_argument("tournament_select: empty population");
    if (tournament_size < 1) throw std::invalid_argument("tournament_select: tournament_size must be >= 1");
    std::vector<Genotype> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        std::size_t best = rng.uniform_index(pop.size());
        if (!pop.members[best].evaluated()) throw std::logic_error("tournament_select: unevaluated member");
        for (std::size_t t = 1; t < tournament_size; ++t) {
            std::size_t idx = rng.uniform_index(pop.size());
            if (!pop.members[idx].evaluated()) throw std::logic_error("tournament_select: unevaluated member");
            if (*pop.members[idx].fitness > *pop.members[best].fitness) best = idx;
        }
        out.push_back(pop.members[best]);
    }
    return out;
}

namespace detail {
struct BitsHash {
    std::size_t operator()(const Bits& b) const {
        std::size_t h = 0xcbf29ce484222325ull;
        for (auto v : b) {
            h ^= v;
            h *= 0x100000001b3ull;
        }
        return h;
    }
};
} // namespace detail

// Fittest unique fraction of the population: deduplicate by exact bit
// equality (first occurrence kept), sort descending by fitness with stable
// order among ties, return the top ceil(T * P) of the unique set.
inline std::vector<Genotype> truncation_select_unique(const Population& pop, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0) throw std::invalid_argument("truncation_select_unique: T must be in (0,1]");
    std::vector<Genotype> unique;
    std::unordered_set<Bits, detail::BitsHash> seen;
    for (const auto& g : pop.members) {
        if (!g.evaluated()) throw std::logic_error("truncation_select_unique: unevaluated member");
        if (seen.insert(g.bits).second) unique.push_back(g);
    }
    std::stable_sort(unique.begin(), unique.end(),
                     [](const Genotype& a, const Genotype& b) { return *a.fitness > *b.fitness; });
    const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pop.size())));
    if (unique.size() > keep) unique.resize(keep);
    return unique;
}

// Plain truncation: top ceil(T * P) by fitness, duplicates allowed.
inline std::vector<Genotype> truncation_select(const Population& pop, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0) throw std::invalid_argument("truncation_select: T must be in (0,1]");
    std::vector<Genotype> sorted = pop.members;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Genotype& a, const Genotype& b) { return *a.fitness > *b.fitness; });
    const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pop.size())));
    if (sorted.size() > keep) sorted.resize(keep);
    return sorted;
}

// Restricted Tournament Selection replacement. Draws a window of W members
// without replacement, finds the one closest in Hamming distance to the
// candidate (ties: lowest population index among drawn), and replaces it only
// on strict fitness improvement. Returns true if a replacement happened.
inline bool rts_replace(Population& pop, const Genotype& candidate, std::size_t window, RngStream& rng) {
    if (window < 1 || window > pop.size()) throw std::invalid_argument("rts_replace: window out of range");
    if (!candidate.evaluated()) throw std::logic_error("rts_replace: unevaluated candidate");

    // partial Fisher-Yates over indices
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < window; ++i) {
        std::size_t j = i + rng.uniform_index(pop.size() - i);
        std::swap(idx[i], idx[j]);
    }

    std::size_t nearest = idx[0];
    std::size_t nearest_dist = hamming_distance(pop.members[nearest], candidate);
    for (std::size_t i = 1; i < window; ++i) {
        const std::size_t d = hamming_distance(pop.members[idx[i]], candidate);
        if (d < nearest_dist || (d == nearest_dist && idx[i] < nearest)) {
            nearest = idx[i];
            nearest_dist = d;
        }
    }
    if (!pop.members[nearest].evaluated()) throw std::logic_error("rts_replace: unevaluated member");
    if (*candidate.fitness > *pop.members[nearest].fitness) {
        pop.members[nearest] = candidate;
        return true;
    }
    return false;
}

} // namespace neda
