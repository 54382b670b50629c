#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "boa_network.hpp"
#include "da.hpp"
#include "genotype.hpp"
#include "nade.hpp"
#include "problem.hpp"
#include "rng.hpp"
#include "selection.hpp"

namespace neda {

enum class ModelKind { da, nade, ga, pbil, boa };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::da: return "da";
        case ModelKind::nade: return "nade";
        case ModelKind::ga: return "ga";
        case ModelKind::pbil: return "pbil";
        case ModelKind::boa: return "boa";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "da") return ModelKind::da;
    if (s == "nade") return ModelKind::nade;
    if (s == "ga") return ModelKind::ga;
    if (s == "pbil") return ModelKind::pbil;
    if (s == "boa") return ModelKind::boa;
    throw std::invalid_argument("unknown algorithm: " + s);
}

struct OptimizerConfig {
    ModelKind model_kind = ModelKind::da;
    std::size_t population = 100;     // P
    double training_fraction = 0.5;   // T
    std::size_t epochs = 3;           // E, training epochs per generation
    double learning_rate = 0.05;      // LR
    std::size_t hidden_units = 64;    // H
    bool niching = true;
    std::size_t niche_window = 50;    // W
    std::size_t max_evals = 100000;   // EVALS
    std::size_t batch_size = 20;
    // dA
    double corruption = 0.25;         // p(c)
    CorruptionKind corruption_kind = CorruptionKind::replace_uniform;
    std::size_t tournament_size = 2;  // input-set selection
    // GA
    double crossover_rate = 0.9;
    double mutation_rate = 0.01;      // per bit
    // PBIL
    double pbil_alpha = 0.1;
    double pbil_mutation_prob = 0.02;
    double pbil_mutation_shift = 0.05;

    void validate() const {
        if (population < 1) throw std::invalid_argument("config: P must be >= 1");
        if (training_fraction <= 0.0 || training_fraction > 1.0)
            throw std::invalid_argument("config: T must be in (0,1]");
        if (max_evals < population) throw std::invalid_argument("config: EVALS must be >= P");
        if (learning_rate < 0) throw std::invalid_argument("config: LR must be non-negative");
        if (niching && niche_window < 1)
            throw std::invalid_argument("config: niching window out of range");
    }
};

struct RunRecord {
    std::vector<double> best_per_generation; // best-so-far at each generation boundary
    std::size_t evals_used = 0;
    bool success = false;
    Genotype best;
    Population final_population;
    std::uint64_t seed = 0;
    OptimizerConfig config;
    bool aborted = false;
    std::string abort_reason;
};

namespace detail {

struct RunState {
    RunRecord record;
    double best_fitness = -std::numeric_limits<double>::infinity();
    std::optional<double> optimum;

    void observe(const Genotype& g) {
        if (*g.fitness > best_fitness) {
            best_fitness = *g.fitness;
            record.best = g;
        }
    }
    bool optimum_reached() const { return optimum && best_fitness >= *optimum; }
    void close_generation() { record.best_per_generation.push_back(best_fitness); }
};

inline void evaluate_all(const Problem& problem, Population& pop, RunState& state) {
    for (auto& g : pop.members) {
        evaluate(problem, g);
        state.observe(g);
    }
}

// E epochs of shuffled minibatch training over the selected set.
template <typename TrainFn>
void train_epochs(const std::vector<Genotype>& training, const OptimizerConfig& cfg,
                  RngStream& shuffle_rng, TrainFn&& train_batch) {
    std::vector<Bits> rows;
    rows.reserve(training.size());
    for (const auto& g : training) rows.push_back(g.bits);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = rows.size(); i > 1; --i)
            std::swap(rows[i - 1], rows[shuffle_rng.uniform_index(i)]);
        for (std::size_t start = 0; start < rows.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(rows.size(), start + cfg.batch_size);
            std::vector<Bits> batch(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                    rows.begin() + static_cast<std::ptrdiff_t>(end));
            train_batch(batch);
        }
    }
}

inline void incorporate(Population& pop, std::vector<Genotype>&& samples, const OptimizerConfig& cfg,
                        RngStream& niche_rng) {
    if (cfg.niching) {
        const std::size_t window = std::min(cfg.niche_window, pop.size());
        for (auto& s : samples) rts_replace(pop, s, window, niche_rng);
    } else {
        pop.members = std::move(samples);
    }
    ++pop.generation;
}

} // namespace detail

// Swap the segment [cut1, cut2) between two parents, in place.
inline void two_point_crossover(Bits& a, Bits& b, std::size_t cut1, std::size_t cut2) {
    if (cut1 > cut2 || cut2 > a.size() || a.size() != b.size())
        throw std::invalid_argument("two_point_crossover: bad cut points");
    for (std::size_t i = cut1; i < cut2; ++i) std::swap(a[i], b[i]);
}

// PBIL learning step: move the probability vector toward the best sample.
inline void pbil_learn_step(std::vector<double>& prob, std::span<const std::uint8_t> best, double alpha) {
    if (prob.size() != best.size()) throw std::invalid_argument("pbil_learn_step: length mismatch");
    for (std::size_t i = 0; i < prob.size(); ++i)
        prob[i] = (1.0 - alpha) * prob[i] + alpha * static_cast<double>(best[i]);
}

// PBIL mutation: each component shifts toward a fresh uniform bit with the
// given probability, then the vector is clamped to [0.01, 0.99].
inline void pbil_mutate(std::vector<double>& prob, double mutation_prob, double shift, RngStream& rng) {
    for (auto& p : prob) {
        if (rng.bernoulli(mutation_prob))
            p = (1.0 - shift) * p + shift * static_cast<double>(rng.random_bit());
        p = std::min(0.99, std::max(0.01, p));
    }
}

struct NeuralRun {
    RunRecord record;
    std::shared_ptr<DaModel> da;
    std::shared_ptr<NadeModel> nade;
};

// GA-dA / GA-NADE driver: truncation-selected unique training set, online
// minibatch model training each generation, model-driven sampling, optional
// RTS niching. Stops on budget exhaustion or on reaching the registered
// optimum.
inline NeuralRun run_neural_eda(const OptimizerConfig& cfg, const Problem& problem, RngStream& rng) {
    cfg.validate();
    if (cfg.model_kind != ModelKind::da && cfg.model_kind != ModelKind::nade)
        throw std::invalid_argument("run_neural_eda: model_kind must be da or nade");
    const std::size_t dim = problem.dimension();

    auto init_rng = rng.substream("init");
    auto model_rng = rng.substream("model_init");
    auto train_rng = rng.substream("train");
    auto corrupt_rng = rng.substream("corruption");
    auto select_rng = rng.substream("selection");
    auto sample_rng = rng.substream("sampling");
    auto niche_rng = rng.substream("niching");

    NeuralRun run;
    if (cfg.model_kind == ModelKind::da)
        run.da = std::make_shared<DaModel>(dim, cfg.hidden_units, cfg.corruption, cfg.learning_rate,
                                           model_rng, cfg.corruption_kind);
    else
        run.nade = std::make_shared<NadeModel>(dim, cfg.hidden_units, cfg.learning_rate, model_rng);

    detail::RunState state;
    state.record.seed = rng.seed();
    state.record.config = cfg;
    state.optimum = problem.optimum();

    Population pop = init_population(cfg.population, dim, init_rng);
    detail::evaluate_all(problem, pop, state);

    try {
        while (state.record.evals_used < cfg.max_evals && !state.optimum_reached()) {
            const auto training = truncation_select_unique(pop, cfg.training_fraction);
            if (run.da) {
                detail::train_epochs(training, cfg, train_rng,
                                     [&](const std::vector<Bits>& b) { run.da->train_minibatch(b, corrupt_rng); });
            } else {
                detail::train_epochs(training, cfg, train_rng,
                                     [&](const std::vector<Bits>& b) { run.nade->train_minibatch(b); });
            }

            std::vector<Genotype> samples;
            samples.reserve(cfg.population);
            if (run.da) {
                const auto inputs =
                    tournament_select(pop, cfg.population, cfg.tournament_size, select_rng);
                for (const auto& in : inputs)
                    samples.emplace_back(run.da->sample(in.bits, sample_rng));
            } else {
                // Resample until the sample set contains solutions absent from
                // the population, capped at 10 P draws; any shortfall is
                // filled with the last drawn candidates.
                std::unordered_set<Bits, detail::BitsHash> pop_bits;
                for (const auto& g : pop.members) pop_bits.insert(g.bits);
                std::vector<Bits> rejected;
                for (std::size_t draw = 0; draw < 10 * cfg.population && samples.size() < cfg.population;
                     ++draw) {
                    Bits candidate = run.nade->sample(sample_rng);
                    if (pop_bits.find(candidate) == pop_bits.end())
                        samples.emplace_back(std::move(candidate));
                    else
                        rejected.push_back(std::move(candidate));
                }
                for (std::size_t i = rejected.size(); i > 0 && samples.size() < cfg.population; --i)
                    samples.emplace_back(std::move(rejected[i - 1]));
            }

            for (auto& s : samples) {
                evaluate(problem, s);
                state.observe(s);
            }
            state.record.evals_used += cfg.population;
            detail::incorporate(pop, std::move(samples), cfg, niche_rng);
            state.close_generation();
        }
    } catch (const std::runtime_error& e) {
        state.record.aborted = true;
        state.record.abort_reason = e.what();
        state.record.success = false;
        state.record.final_population = std::move(pop);
        run.record = std::move(state.record);
        return run;
    }

    state.record.success = state.optimum_reached();
    state.record.final_population = std::move(pop);
    if (state.record.best_per_generation.empty()) state.close_generation();
    run.record = std::move(state.record);
    return run;
}

// Canonical generational GA: size-2 tournaments, two-point crossover,
// per-bit mutation, elitism of one.
inline RunRecord run_ga(const OptimizerConfig& cfg, const Problem& problem, RngStream& rng) {
    cfg.validate();
    const std::size_t dim = problem.dimension();
    auto init_rng = rng.substream("init");
    auto select_rng = rng.substream("selection");
    auto op_rng = rng.substream("operators");

    detail::RunState state;
    state.record.seed = rng.seed();
    state.record.config = cfg;
    state.optimum = problem.optimum();

    Population pop = init_population(cfg.population, dim, init_rng);
    detail::evaluate_all(problem, pop, state);

    while (state.record.evals_used < cfg.max_evals && !state.optimum_reached()) {
        std::vector<Genotype> next;
        next.reserve(cfg.population);
        next.push_back(state.record.best); // elite
        while (next.size() < cfg.population) {
            auto parents = tournament_select(pop, 2, 2, select_rng);
            Bits a = parents[0].bits, b = parents[1].bits;
            if (op_rng.bernoulli(cfg.crossover_rate)) {
                std::size_t c1 = op_rng.uniform_index(dim + 1);
                std::size_t c2 = op_rng.uniform_index(dim + 1);
                if (c1 > c2) std::swap(c1, c2);
                two_point_crossover(a, b, c1, c2);
            }
            for (auto* child : {&a, &b}) {
                for (auto& bit : *child)
                    if (op_rng.bernoulli(cfg.mutation_rate)) bit ^= 1;
                if (next.size() < cfg.population) next.emplace_back(std::move(*child));
            }
        }
        for (auto& g : next) {
            evaluate(problem, g);
            state.observe(g);
        }
        state.record.evals_used += cfg.population;
        pop.members = std::move(next);
        ++pop.generation;
        state.close_generation();
    }
    state.record.success = state.optimum_reached();
    state.record.final_population = std::move(pop);
    if (state.record.best_per_generation.empty()) state.close_generation();
    return state.record;
}

// PBIL: probability vector updated toward the best sample of each iteration,
// with component-wise mutation and clamping.
inline RunRecord run_pbil(const OptimizerConfig& cfg, const Problem& problem, RngStream& rng) {
    cfg.validate();
    const std::size_t dim = problem.dimension();
    auto sample_rng = rng.substream("sampling");
    auto mut_rng = rng.substream("mutation");

    detail::RunState state;
    state.record.seed = rng.seed();
    state.record.config = cfg;
    state.optimum = problem.optimum();

    std::vector<double> prob(dim, 0.5);
    Population pop;
    while (state.record.evals_used < cfg.max_evals && !state.optimum_reached()) {
        pop.members.clear();
        std::size_t best_idx = 0;
        for (std::size_t s = 0; s < cfg.population; ++s) {
            Bits b(dim);
            for (std::size_t i = 0; i < dim; ++i) b[i] = sample_rng.bernoulli(prob[i]) ? 1 : 0;
            Genotype g(std::move(b));
            evaluate(problem, g);
            state.observe(g);
            pop.members.push_back(std::move(g));
            if (*pop.members.back().fitness > *pop.members[best_idx].fitness) best_idx = s;
        }
        state.record.evals_used += cfg.population;
        pbil_learn_step(prob, pop.members[best_idx].bits, cfg.pbil_alpha);
        pbil_mutate(prob, cfg.pbil_mutation_prob, cfg.pbil_mutation_shift, mut_rng);
        ++pop.generation;
        state.close_generation();
    }
    state.record.success = state.optimum_reached();
    state.record.final_population = std::move(pop);
    if (state.record.best_per_generation.empty()) state.close_generation();
    return state.record;
}

// BOA: truncation selection, fresh greedy BIC network each generation,
// ancestral sampling, optional RTS niching.
inline RunRecord run_boa(const OptimizerConfig& cfg, const Problem& problem, RngStream& rng) {
    cfg.validate();
    const std::size_t dim = problem.dimension();
    auto init_rng = rng.substream("init");
    auto sample_rng = rng.substream("sampling");
    auto niche_rng = rng.substream("niching");

    detail::RunState state;
    state.record.seed = rng.seed();
    state.record.config = cfg;
    state.optimum = problem.optimum();

    Population pop = init_population(cfg.population, dim, init_rng);
    detail::evaluate_all(problem, pop, state);

    while (state.record.evals_used < cfg.max_evals && !state.optimum_reached()) {
        const auto selected = truncation_select(pop, cfg.training_fraction);
        std::vector<Bits> data;
        data.reserve(selected.size());
        for (const auto& g : selected) data.push_back(g.bits);
        const auto net = BoaNetwork::learn(data, dim);

        std::vector<Genotype> samples;
        samples.reserve(cfg.population);
        for (std::size_t s = 0; s < cfg.population; ++s) samples.emplace_back(net.sample(sample_rng));
        for (auto& g : samples) {
            evaluate(problem, g);
            state.observe(g);
        }
        state.record.evals_used += cfg.population;
        detail::incorporate(pop, std::move(samples), cfg, niche_rng);
        state.close_generation();
    }
    state.record.success = state.optimum_reached();
    state.record.final_population = std::move(pop);
    if (state.record.best_per_generation.empty()) state.close_generation();
    return state.record;
}

inline RunRecord run_optimizer(const OptimizerConfig& cfg, const Problem& problem, RngStream& rng) {
    switch (cfg.model_kind) {
        case ModelKind::da:
        case ModelKind::nade: return run_neural_eda(cfg, problem, rng).record;
        case ModelKind::ga: return run_ga(cfg, problem, rng);
        case ModelKind::pbil: return run_pbil(cfg, problem, rng);
        case ModelKind::boa: return run_boa(cfg, problem, rng);
    }
    throw std::logic_error("run_optimizer: unknown model kind");
}

} // namespace neda
