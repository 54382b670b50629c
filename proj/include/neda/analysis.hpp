#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "da.hpp"
#include "genotype.hpp"
#include "nade.hpp"
#include "rng.hpp"

namespace neda {

enum class GroupPredicate { all_ones, all_zeros };

struct IndicatorGroup {
    std::vector<std::size_t> indices;
    GroupPredicate predicate = GroupPredicate::all_ones;
    std::string label;
};

inline bool group_holds(const IndicatorGroup& group, std::span<const std::uint8_t> bits) {
    const std::uint8_t want = group.predicate == GroupPredicate::all_ones ? 1 : 0;
    for (auto i : group.indices) {
        if (i >= bits.size()) throw std::invalid_argument("group index out of range");
        if (bits[i] != want) return false;
    }
    return true;
}

// Covariance matrix of per-group binary indicators across a sample set.
inline std::vector<std::vector<double>> analyze_covariance(const std::vector<Bits>& samples,
                                                           const std::vector<IndicatorGroup>& groups) {
    if (samples.size() < 2) throw std::invalid_argument("analyze_covariance: need at least 2 samples");
    for (const auto& g : groups)
        if (g.indices.empty()) throw std::invalid_argument("analyze_covariance: empty group");
    const std::size_t n = samples.size(), m = groups.size();
    std::vector<std::vector<std::uint8_t>> indicator(m, std::vector<std::uint8_t>(n));
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t g = 0; g < m; ++g) indicator[g][s] = group_holds(groups[g], samples[s]) ? 1 : 0;
    std::vector<double> mean(m, 0.0);
    for (std::size_t g = 0; g < m; ++g) {
        for (auto v : indicator[g]) mean[g] += v;
        mean[g] /= static_cast<double>(n);
    }
    std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            double acc = 0;
            for (std::size_t s = 0; s < n; ++s)
                acc += static_cast<double>(indicator[a][s]) * static_cast<double>(indicator[b][s]);
            const double c = acc / static_cast<double>(n) - mean[a] * mean[b];
            cov[a][b] = cov[b][a] = c;
        }
    }
    return cov;
}

struct DiversityReport {
    std::vector<double> mean_knn_distance; // per sample, mean Hamming distance to k nearest others
    std::vector<double> fitness;           // NaN where not evaluated
};

inline DiversityReport analyze_diversity(const std::vector<Genotype>& samples, std::size_t k = 5) {
    if (samples.size() <= k) throw std::invalid_argument("analyze_diversity: need more than k samples");
    DiversityReport report;
    report.mean_knn_distance.reserve(samples.size());
    report.fitness.reserve(samples.size());
    std::vector<std::size_t> dists(samples.size() - 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::size_t n = 0;
        for (std::size_t j = 0; j < samples.size(); ++j)
            if (j != i) dists[n++] = hamming_distance(samples[i], samples[j]);
        std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k - 1), dists.end());
        std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k), dists.end());
        double acc = 0;
        for (std::size_t t = 0; t < k; ++t) acc += static_cast<double>(dists[t]);
        report.mean_knn_distance.push_back(acc / static_cast<double>(k));
        report.fitness.push_back(samples[i].fitness.value_or(std::nan("")));
    }
    return report;
}

struct ClampStudy {
    std::vector<double> locus_one_probability;
    std::vector<double> group_frequency; // aligned with the groups argument
    std::size_t sample_count = 0;
};

// Draw samples under a clamp and report per-locus one-probabilities plus
// per-group predicate frequencies. For the NADE the clamp fixes positions
// during ancestral sampling; for the dA it fixes bits of the (corrupted)
// model inputs, which are uniform random unless an input set is supplied.
inline ClampStudy clamp_study(const NadeModel& model, const ClampSpec& clamp, std::size_t n_samples,
                              RngStream& rng, const std::vector<IndicatorGroup>& groups = {}) {
    ClampStudy study;
    study.locus_one_probability.assign(model.dimension(), 0.0);
    study.group_frequency.assign(groups.size(), 0.0);
    study.sample_count = n_samples;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Bits x = model.sample(rng, clamp);
        for (std::size_t i = 0; i < x.size(); ++i) study.locus_one_probability[i] += x[i];
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (group_holds(groups[g], x)) study.group_frequency[g] += 1;
    }
    for (auto& p : study.locus_one_probability) p /= static_cast<double>(n_samples);
    for (auto& f : study.group_frequency) f /= static_cast<double>(n_samples);
    return study;
}

inline ClampStudy clamp_study(const DaModel& model, const ClampSpec& clamp, std::size_t n_samples,
                              RngStream& rng, const std::vector<IndicatorGroup>& groups = {},
                              const std::vector<Bits>& inputs = {}) {
    if (!clamp.empty() && clamp.size() != model.dimension())
        throw std::invalid_argument("clamp_study: clamp length mismatch");
    ClampStudy study;
    study.locus_one_probability.assign(model.dimension(), 0.0);
    study.group_frequency.assign(groups.size(), 0.0);
    study.sample_count = n_samples;
    for (std::size_t s = 0; s < n_samples; ++s) {
        Bits input;
        if (inputs.empty()) {
            input.resize(model.dimension());
            for (auto& b : input) b = rng.random_bit();
        } else {
            input = inputs[s % inputs.size()];
        }
        Bits noisy = corrupt(input, model.corruption_level(), rng, model.corruption_kind());
        for (std::size_t i = 0; i < clamp.size(); ++i)
            if (clamp[i] >= 0) noisy[i] = static_cast<std::uint8_t>(clamp[i]);
        const auto y = model.forward(noisy);
        Bits x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) x[i] = rng.bernoulli(y[i]) ? 1 : 0;
        for (std::size_t i = 0; i < x.size(); ++i) study.locus_one_probability[i] += x[i];
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (group_holds(groups[g], x)) study.group_frequency[g] += 1;
    }
    for (auto& p : study.locus_one_probability) p /= static_cast<double>(n_samples);
    for (auto& f : study.group_frequency) f /= static_cast<double>(n_samples);
    return study;
}

} // namespace neda
