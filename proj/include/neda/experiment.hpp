#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "cnf.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "knapsack.hpp"
#include "optimizer.hpp"
#include "problem.hpp"

namespace neda {

// Wraps a problem to register a known optimum (used for instances whose
// optimum is supplied by the experiment file, e.g. knapsack data).
class WithOptimum final : public Problem {
public:
    WithOptimum(std::shared_ptr<const Problem> inner, double optimum)
        : inner_(std::move(inner)), optimum_(optimum) {}
    double evaluate(std::span<const std::uint8_t> bits) const override { return inner_->evaluate(bits); }
    std::size_t dimension() const override { return inner_->dimension(); }
    std::optional<double> optimum() const override { return optimum_; }
    std::string name() const override { return inner_->name(); }

private:
    std::shared_ptr<const Problem> inner_;
    double optimum_;
};

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}
inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "off" || s == "0" || s == "no") return false;
    throw std::invalid_argument("expected a boolean, got '" + s + "'");
}
} // namespace detail

// Problem ids: maxones:D | hiff:D | royalroad:D[:block] | rrl:k:n |
// maxsat:path | knapsack:path | randomknapsack:N:m:seed
inline std::shared_ptr<Problem> make_problem(const std::string& id) {
    const auto parts = detail::split(id, ':');
    const std::string& kind = parts[0];
    auto arg = [&](std::size_t i) -> const std::string& {
        if (i >= parts.size()) throw std::invalid_argument("problem id '" + id + "': missing argument");
        return parts[i];
    };
    try {
        if (kind == "maxones") return std::make_shared<MaxOnes>(std::stoul(arg(1)));
        if (kind == "hiff") return std::make_shared<Hiff>(std::stoul(arg(1)));
        if (kind == "royalroad")
            return std::make_shared<RoyalRoad>(std::stoul(arg(1)),
                                               parts.size() > 2 ? std::stoul(parts[2]) : 8);
        if (kind == "rrl") return std::make_shared<RrLinkages>(std::stoul(arg(1)), std::stoul(arg(2)));
        if (kind == "maxsat") return std::make_shared<MaxSat>(load_dimacs(arg(1)));
        if (kind == "knapsack") return std::make_shared<Knapsack>(load_knapsack(arg(1)));
        if (kind == "randomknapsack") {
            RngStream rng(std::stoull(arg(3)));
            auto inst_rng = rng.substream("knapsack_instance");
            return std::make_shared<Knapsack>(
                gen_random_knapsack(std::stoul(arg(1)), std::stoul(arg(2)), inst_rng));
        }
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("problem id '" + id + "': bad argument");
    }
    throw std::invalid_argument("unknown problem kind: " + kind);
}

// Mask debiasing applies to the block-structured benchmarks only.
inline bool problem_maskable(const std::string& id) {
    const std::string kind = detail::split(id, ':')[0];
    return kind == "hiff" || kind == "royalroad" || kind == "rrl";
}

inline void apply_config_key(OptimizerConfig& c, const std::string& key, const std::string& value) {
    if (key == "P") c.population = std::stoul(value);
    else if (key == "T") c.training_fraction = std::stod(value);
    else if (key == "E") c.epochs = std::stoul(value);
    else if (key == "LR") c.learning_rate = std::stod(value);
    else if (key == "H") c.hidden_units = std::stoul(value);
    else if (key == "niching") c.niching = detail::parse_bool(value);
    else if (key == "W") c.niche_window = std::stoul(value);
    else if (key == "evals") c.max_evals = std::stoul(value);
    else if (key == "batch") c.batch_size = std::stoul(value);
    else if (key == "corruption") c.corruption = std::stod(value);
    else if (key == "corruption_kind")
        c.corruption_kind = value == "zero_mask" ? CorruptionKind::zero_mask : CorruptionKind::replace_uniform;
    else if (key == "tournament_size") c.tournament_size = std::stoul(value);
    else if (key == "crossover") c.crossover_rate = std::stod(value);
    else if (key == "mutation") c.mutation_rate = std::stod(value);
    else if (key == "alpha") c.pbil_alpha = std::stod(value);
    else if (key == "mutation_prob") c.pbil_mutation_prob = std::stod(value);
    else if (key == "mutation_shift") c.pbil_mutation_shift = std::stod(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

struct ConfigCell {
    OptimizerConfig config;
    std::string description; // "key=value;..." in section order
};

struct AlgorithmSpec {
    std::string label;  // section name
    ModelKind kind;
    bool mask = true;   // applies only to neural algorithms on maskable problems
    std::vector<ConfigCell> cells; // Cartesian product of list-valued keys
};

struct ExperimentSpec {
    std::string problem_id;
    std::size_t trials = 10;
    std::uint64_t base_seed = 1;
    std::string output_dir = "out";
    std::optional<double> optimum_override;
    bool save_models = false; // write <output>/models/<label>_trial<t>.ckpt
    std::vector<AlgorithmSpec> algorithms;

    static ExperimentSpec from_config(const ConfigFile& cfg) {
        ExperimentSpec spec;
        const auto* exp = cfg.find_section("experiment");
        if (!exp) throw std::runtime_error("config error: missing [experiment] section");
        auto get = [&](const std::string& key) -> std::string {
            const auto* v = exp->find(key);
            if (!v) throw std::runtime_error("config error: [experiment] missing key '" + key + "'");
            return v->front();
        };
        spec.problem_id = get("problem");
        if (const auto* v = exp->find("trials")) spec.trials = std::stoul(v->front());
        if (const auto* v = exp->find("base_seed")) spec.base_seed = std::stoull(v->front());
        if (const auto* v = exp->find("output")) spec.output_dir = v->front();
        if (const auto* v = exp->find("optimum")) spec.optimum_override = std::stod(v->front());
        if (const auto* v = exp->find("save_models")) spec.save_models = detail::parse_bool(v->front());
        if (spec.trials < 1) throw std::runtime_error("config error: trials must be >= 1");

        for (const auto& section : cfg.sections()) {
            if (section.name == "experiment") continue;
            AlgorithmSpec alg;
            alg.label = section.name;
            const auto* kind_value = section.find("algorithm");
            alg.kind = model_kind_from_string(kind_value ? kind_value->front() : section.name);
            if (const auto* v = section.find("mask")) alg.mask = detail::parse_bool(v->front());

            alg.cells.push_back({OptimizerConfig{}, ""});
            alg.cells.front().config.model_kind = alg.kind;
            for (const auto& [key, values] : section.entries) {
                if (key == "algorithm" || key == "mask") continue;
                std::vector<ConfigCell> expanded;
                expanded.reserve(alg.cells.size() * values.size());
                for (const auto& cell : alg.cells) {
                    for (const auto& value : values) {
                        ConfigCell next = cell;
                        apply_config_key(next.config, key, value);
                        next.description += (next.description.empty() ? "" : ";") + key + "=" + value;
                        expanded.push_back(std::move(next));
                    }
                }
                alg.cells = std::move(expanded);
            }
            if (alg.cells.empty()) throw std::runtime_error("config error: empty grid for " + alg.label);
            spec.algorithms.push_back(std::move(alg));
        }
        if (spec.algorithms.empty()) throw std::runtime_error("config error: no algorithm sections");
        return spec;
    }

    // Validates instance files up front; throws before any run starts.
    void check_loadable() const { make_problem(problem_id); }
};

// One seeded trial: trial t uses seed base_seed + t; a per-trial XOR mask is
// drawn for neural algorithms on maskable problems. A non-empty
// checkpoint_path receives the trained model of a neural trial.
inline RunRecord run_trial(const ExperimentSpec& spec, const AlgorithmSpec& alg,
                           const OptimizerConfig& cfg, std::size_t trial,
                           const std::string& checkpoint_path = "") {
    RngStream rng(spec.base_seed + trial);
    std::shared_ptr<Problem> problem = make_problem(spec.problem_id);
    if (spec.optimum_override)
        problem = std::make_shared<WithOptimum>(problem, *spec.optimum_override);
    const bool neural = alg.kind == ModelKind::da || alg.kind == ModelKind::nade;
    if (neural && alg.mask && problem_maskable(spec.problem_id)) {
        auto mask_rng = rng.substream("mask");
        Bits mask(problem->dimension());
        for (auto& b : mask) b = mask_rng.random_bit();
        problem = std::make_shared<MaskedProblem>(problem, std::move(mask));
    }
    if (!neural) return run_optimizer(cfg, *problem, rng);
    auto run = run_neural_eda(cfg, *problem, rng);
    if (!checkpoint_path.empty()) {
        std::ofstream out(checkpoint_path);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + checkpoint_path);
        if (run.da) run.da->save(out);
        else run.nade->save(out);
    }
    return run.record;
}

struct SummaryRow {
    std::string algorithm;
    double min_fitness = 0, max_fitness = 0, mean_fitness = 0, sd_fitness = 0;
    double mean_evals = 0, sd_evals = 0;
    double success_pct = 0;
};

inline SummaryRow summarize(const std::string& label, const std::vector<RunRecord>& records) {
    SummaryRow row;
    row.algorithm = label;
    const double n = static_cast<double>(records.size());
    double fit_sum = 0, fit_sq = 0, ev_sum = 0, ev_sq = 0;
    row.min_fitness = std::numeric_limits<double>::infinity();
    row.max_fitness = -std::numeric_limits<double>::infinity();
    std::size_t successes = 0;
    for (const auto& r : records) {
        const double f = r.best.fitness.value_or(-std::numeric_limits<double>::infinity());
        // evaluations to optimum; budget when never reached
        const double e = static_cast<double>(r.success ? r.evals_used : r.config.max_evals);
        row.min_fitness = std::min(row.min_fitness, f);
        row.max_fitness = std::max(row.max_fitness, f);
        fit_sum += f;
        fit_sq += f * f;
        ev_sum += e;
        ev_sq += e * e;
        if (r.success) ++successes;
    }
    row.mean_fitness = fit_sum / n;
    row.sd_fitness = std::sqrt(std::max(0.0, fit_sq / n - row.mean_fitness * row.mean_fitness));
    row.mean_evals = ev_sum / n;
    row.sd_evals = std::sqrt(std::max(0.0, ev_sq / n - row.mean_evals * row.mean_evals));
    row.success_pct = 100.0 * static_cast<double>(successes) / n;
    return row;
}

namespace detail {
template <typename Task>
void run_tasks(std::vector<Task>& tasks, std::size_t jobs) {
    if (jobs <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t n_workers = std::min(jobs, tasks.size());
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                tasks[i]();
            }
        });
    }
    for (auto& t : workers) t.join();
}
} // namespace detail

struct ExperimentResult {
    std::vector<SummaryRow> summaries;
    std::vector<std::vector<RunRecord>> records; // aligned with summaries
};

// Runs every algorithm for `trials` seeded trials and writes records.csv and
// summary.csv into the output directory. Deterministic given the spec;
// trial-level parallelism only affects scheduling, never content.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs = 1,
                                       bool write_output = true) {
    spec.check_loadable();
    const bool save_models = spec.save_models && write_output;
    if (save_models) std::filesystem::create_directories(spec.output_dir + "/models");
    ExperimentResult result;
    result.records.resize(spec.algorithms.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
        const auto& alg = spec.algorithms[a];
        if (alg.cells.size() != 1)
            throw std::runtime_error("config error: [" + alg.label +
                                     "] has list values; use the grid subcommand");
        const bool neural = alg.kind == ModelKind::da || alg.kind == ModelKind::nade;
        result.records[a].resize(spec.trials);
        for (std::size_t t = 0; t < spec.trials; ++t) {
            std::string ckpt;
            if (save_models && neural)
                ckpt = spec.output_dir + "/models/" + alg.label + "_trial" + std::to_string(t) +
                       ".ckpt";
            tasks.push_back([&spec, &alg, a, t, &result, ckpt] {
                result.records[a][t] = run_trial(spec, alg, alg.cells.front().config, t, ckpt);
            });
        }
    }
    detail::run_tasks(tasks, jobs);
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a)
        result.summaries.push_back(summarize(spec.algorithms[a].label, result.records[a]));

    if (write_output) {
        std::filesystem::create_directories(spec.output_dir);
        CsvWriter records_csv(spec.output_dir + "/records.csv",
                              {"algorithm", "trial", "generation", "evals", "best_fitness"});
        for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
            for (std::size_t t = 0; t < spec.trials; ++t) {
                const auto& r = result.records[a][t];
                const std::size_t pop = r.config.population;
                for (std::size_t g = 0; g < r.best_per_generation.size(); ++g) {
                    const std::size_t evals = std::min(pop * (g + 1), r.evals_used);
                    records_csv.write_row({spec.algorithms[a].label, std::to_string(t),
                                           std::to_string(g + 1), std::to_string(evals),
                                           format_number(r.best_per_generation[g])});
                }
            }
        }
        CsvWriter summary_csv(spec.output_dir + "/summary.csv",
                              {"algorithm", "min", "max", "mean", "sd", "mean_evals", "sd_evals",
                               "success_pct"});
        for (const auto& row : result.summaries) {
            summary_csv.write_row({row.algorithm, format_number(row.min_fitness),
                                   format_number(row.max_fitness), format_number(row.mean_fitness),
                                   format_number(row.sd_fitness), format_number(row.mean_evals),
                                   format_number(row.sd_evals), format_number(row.success_pct)});
        }
    }
    return result;
}

struct GridCellResult {
    std::string algorithm;
    std::string description;
    OptimizerConfig config;
    double mean_fitness = 0;
    double mean_evals = 0;
};

struct GridResult {
    std::vector<GridCellResult> cells;              // every cell, enumeration order
    std::vector<GridCellResult> winners;            // one per algorithm
};

// Three trials per cell; cells ranked by mean final best fitness, ties by
// fewer mean evaluations, then lexicographic description order.
inline GridResult grid_search(const ExperimentSpec& spec, std::size_t jobs = 1,
                              bool write_output = true, std::size_t trials_per_cell = 3) {
    spec.check_loadable();
    GridResult result;
    struct CellSlot {
        std::size_t alg;
        const ConfigCell* cell;
        std::vector<RunRecord> records;
    };
    std::vector<CellSlot> slots;
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a)
        for (const auto& cell : spec.algorithms[a].cells)
            slots.push_back({a, &cell, std::vector<RunRecord>(trials_per_cell)});
    std::vector<std::function<void()>> tasks;
    for (auto& slot : slots) {
        for (std::size_t t = 0; t < trials_per_cell; ++t) {
            tasks.push_back([&spec, &slot, t] {
                slot.records[t] =
                    run_trial(spec, spec.algorithms[slot.alg], slot.cell->config, t);
            });
        }
    }
    detail::run_tasks(tasks, jobs);

    for (const auto& slot : slots) {
        const auto row = summarize(spec.algorithms[slot.alg].label, slot.records);
        result.cells.push_back({row.algorithm, slot.cell->description, slot.cell->config,
                                row.mean_fitness, row.mean_evals});
    }
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
        const GridCellResult* best = nullptr;
        for (const auto& cell : result.cells) {
            if (cell.algorithm != spec.algorithms[a].label) continue;
            if (!best || cell.mean_fitness > best->mean_fitness ||
                (cell.mean_fitness == best->mean_fitness && cell.mean_evals < best->mean_evals) ||
                (cell.mean_fitness == best->mean_fitness && cell.mean_evals == best->mean_evals &&
                 cell.description < best->description)) {
                best = &cell;
            }
        }
        result.winners.push_back(*best);
    }

    if (write_output) {
        std::filesystem::create_directories(spec.output_dir);
        CsvWriter grid_csv(spec.output_dir + "/grid.csv",
                           {"algorithm", "config", "mean_fitness", "mean_evals", "winner"});
        for (const auto& cell : result.cells) {
            bool is_winner = false;
            for (const auto& w : result.winners)
                is_winner |= (w.algorithm == cell.algorithm && w.description == cell.description);
            grid_csv.write_row({cell.algorithm, "\"" + cell.description + "\"",
                                format_number(cell.mean_fitness), format_number(cell.mean_evals),
                                is_winner ? "1" : "0"});
        }
    }
    return result;
}

} // namespace neda
