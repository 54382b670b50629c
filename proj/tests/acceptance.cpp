// Acceptance gates. Each criterion prints one PASS/FAIL line; the process
// exits nonzero if any criterion fails. Run with criterion numbers as
// arguments to restrict the set (e.g. `acceptance 1 2 6`).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "neda/neda.hpp"

using namespace neda;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s: %s (%s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::size_t worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 4;
}

// ---------------------------------------------------------------- criterion 1

void criterion_normalization() {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        NadeModel m(8, 5, 0.1, rng);
        double total = 0;
        Bits x(8);
        for (std::size_t v = 0; v < 256; ++v) {
            for (std::size_t i = 0; i < 8; ++i) x[i] = (v >> i) & 1;
            total += std::exp(m.log_likelihood(x));
        }
        worst = std::max(worst, std::abs(total - 1.0));
    }
    report("nade normalization, 20 models, D=8", worst < 1e-8,
           "max |sum P(x) - 1| = " + std::to_string(worst));
}

template <typename LossFn>
double fd_max_rel_err(std::vector<std::vector<double>*> blocks,
                      std::vector<const std::vector<double>*> updated, LossFn&& loss) {
    const double eps = 1e-5;
    double max_rel = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto& params = *blocks[b];
        const auto& after = *updated[b];
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double analytic = params[i] - after[i]; // lr = 1
            const double saved = params[i];
            params[i] = saved + eps;
            const double up = loss();
            params[i] = saved - eps;
            const double down = loss();
            params[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::abs(analytic - numeric) / scale);
        }
    }
    return max_rel;
}

void criterion_gradients() {
    double worst_da = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        DaModel m(8, 4, 0.0, 1.0, rng); // corruption off: deterministic loss
        std::vector<Bits> batch;
        for (int r = 0; r < 5; ++r) {
            Bits b(8);
            for (auto& bit : b) bit = rng.random_bit();
            batch.push_back(std::move(b));
        }
        DaModel after = m;
        RngStream train_rng(seed + 500);
        after.train_minibatch(batch, train_rng);
        auto loss = [&] {
            double total = 0;
            for (const auto& x : batch) total += m.cross_entropy(m.forward(x), x);
            return total / double(batch.size());
        };
        worst_da = std::max(
            worst_da,
            fd_max_rel_err({&m.encoder_weights(), &m.encoder_bias(), &m.decoder_weights(),
                            &m.decoder_bias()},
                           {&after.encoder_weights(), &after.encoder_bias(),
                            &after.decoder_weights(), &after.decoder_bias()},
                           loss));
    }
    report("da analytic vs finite-difference gradients, 20 seeds", worst_da < 1e-4,
           "max relative error = " + std::to_string(worst_da));

    double worst_nade = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        NadeModel m(6, 4, 1.0, rng);
        std::vector<Bits> batch;
        for (int r = 0; r < 5; ++r) {
            Bits b(6);
            for (auto& bit : b) bit = rng.random_bit();
            batch.push_back(std::move(b));
        }
        NadeModel after = m;
        after.train_minibatch(batch);
        auto loss = [&] {
            double total = 0;
            for (const auto& x : batch) total -= m.log_likelihood(x);
            return total / double(batch.size());
        };
        worst_nade = std::max(
            worst_nade,
            fd_max_rel_err({&m.shared_weights(), &m.visible_bias(), &m.hidden_bias(),
                            &m.output_weights()},
                           {&after.shared_weights(), &after.visible_bias(), &after.hidden_bias(),
                            &after.output_weights()},
                           loss));
    }
    report("nade analytic vs finite-difference gradients, 20 seeds", worst_nade < 1e-4,
           "max relative error = " + std::to_string(worst_nade));
}

void criterion_sampler_tv() {
    RngStream rng(2024);
    NadeModel m(6, 4, 0.1, rng);
    const auto table = m.exact_distribution();
    std::vector<std::size_t> counts(64, 0);
    const std::size_t n = 1000000;
    for (std::size_t t = 0; t < n; ++t) {
        const auto s = m.sample(rng);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < 6; ++i) idx |= std::size_t(s[i]) << i;
        ++counts[idx];
    }
    double tv = 0;
    for (std::size_t v = 0; v < 64; ++v)
        tv += std::abs(double(counts[v]) / double(n) - table[v]);
    tv /= 2;
    report("nade sampler vs exact distribution, D=6, 10^6 samples", tv <= 0.01,
           "total variation = " + std::to_string(tv));
}

// ---------------------------------------------------------------- criterion 2

double rrl_oracle(std::span<const std::uint8_t> x, std::size_t k, std::size_t n) {
    // independently coded from the definition: n partitions of 2k bits; a
    // partition scores 1 when exactly one of its halves is all ones and the
    // other all zeros; +1 when the first left half and last right half are
    // both all ones or both all zeros
    auto all = [&](std::size_t begin, std::size_t count, std::uint8_t v) {
        for (std::size_t i = 0; i < count; ++i)
            if (x[begin + i] != v) return false;
        return true;
    };
    double f = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t left = 2 * k * j, right = left + k;
        const bool lo = all(left, k, 1), lz = all(left, k, 0);
        const bool ro = all(right, k, 1), rz = all(right, k, 0);
        if ((lo && rz) || (lz && ro)) f += 1;
    }
    const std::size_t last_right = 2 * k * n - k;
    if ((all(0, k, 1) && all(last_right, k, 1)) || (all(0, k, 0) && all(last_right, k, 0))) f += 1;
    return f;
}

void criterion_problems() {
    report("hiff all-ones, D=128", Hiff(128).evaluate(Bits(128, 1)) == 1024,
           "value = " + format_number(Hiff(128).evaluate(Bits(128, 1))));
    report("hiff all-ones, D=256", Hiff(256).evaluate(Bits(256, 1)) == 2304,
           "value = " + format_number(Hiff(256).evaluate(Bits(256, 1))));
    report("royal road all-ones, D=128", RoyalRoad(128).evaluate(Bits(128, 1)) == 128,
           "value = " + format_number(RoyalRoad(128).evaluate(Bits(128, 1))));

    const auto instance = load_knapsack("data/knapsack105.kp");
    Knapsack knapsack(instance);
    std::ifstream opt_file("data/knapsack105.opt");
    std::string selection;
    opt_file >> selection;
    const double kp_value = knapsack.evaluate(Genotype::from_string(selection).bits);
    report("knapsack optimum selection", kp_value == 624319,
           "value = " + format_number(kp_value));

    MaxSat maxsat(load_dimacs("data/uf100-430.cnf"));
    std::ifstream witness_file("data/uf100-430.witness");
    std::string witness;
    witness_file >> witness;
    const double sat = maxsat.evaluate(Genotype::from_string(witness).bits);
    report("uf100-430 satisfying assignment", sat == 430, "clauses = " + format_number(sat));

    RrLinkages rrl(1, 2);
    bool agree = true;
    double max_seen = 0;
    for (std::size_t v = 0; v < 16; ++v) {
        Bits x(4);
        for (std::size_t i = 0; i < 4; ++i) x[i] = (v >> i) & 1;
        const double got = rrl.evaluate(x);
        agree = agree && got == rrl_oracle(x, 1, 2);
        max_seen = std::max(max_seen, got);
    }
    report("rr-linkages exhaustive oracle, k=1 n=2", agree && max_seen == 3.0,
           agree ? "all 16 inputs agree, max = " + format_number(max_seen) : "mismatch");
}

// ---------------------------------------------------------------- criterion 3

struct TrialOutcome {
    bool success = false;
    std::shared_ptr<NadeModel> nade;
};

// Mirrors the harness: neural optimizers see a per-trial random XOR mask on
// the block benchmarks; baselines evaluate the raw problem.
TrialOutcome solve_trial(const OptimizerConfig& cfg, std::shared_ptr<Problem> problem,
                         std::uint64_t seed, bool mask) {
    RngStream rng(seed);
    const bool neural = cfg.model_kind == ModelKind::da || cfg.model_kind == ModelKind::nade;
    if (neural && mask) {
        auto mask_rng = rng.substream("mask");
        Bits m(problem->dimension());
        for (auto& b : m) b = mask_rng.random_bit();
        problem = std::make_shared<MaskedProblem>(problem, std::move(m));
    }
    TrialOutcome out;
    if (neural) {
        auto run = run_neural_eda(cfg, *problem, rng);
        out.success = run.record.success;
        out.nade = run.nade;
    } else {
        out.success = run_optimizer(cfg, *problem, rng).success;
    }
    return out;
}

int solve_count(const OptimizerConfig& cfg, const std::function<std::shared_ptr<Problem>()>& make,
                bool mask, std::size_t trials = 10) {
    std::vector<int> wins(trials, 0);
    std::vector<std::function<void()>> tasks;
    for (std::size_t t = 0; t < trials; ++t)
        tasks.push_back([&, t] { wins[t] = solve_trial(cfg, make(), t + 1, mask).success; });
    detail::run_tasks(tasks, worker_count());
    int total = 0;
    for (int w : wins) total += w;
    return total;
}

OptimizerConfig da_config() {
    OptimizerConfig cfg;
    cfg.model_kind = ModelKind::da;
    cfg.population = 200;
    cfg.training_fraction = 0.5;
    cfg.epochs = 10;
    cfg.learning_rate = 0.3;
    cfg.hidden_units = 64;
    cfg.corruption = 0.1;
    cfg.niching = true;
    cfg.niche_window = 50;
    return cfg;
}

OptimizerConfig nade_config() {
    OptimizerConfig cfg;
    cfg.model_kind = ModelKind::nade;
    cfg.population = 200;
    cfg.training_fraction = 0.5;
    cfg.epochs = 10;
    cfg.learning_rate = 0.1;
    cfg.hidden_units = 64;
    cfg.niching = true;
    cfg.niche_window = 50;
    return cfg;
}

void criterion_royal_road() {
    auto cfg = da_config();
    cfg.max_evals = 100000;
    const int wins = solve_count(cfg, [] { return std::make_shared<RoyalRoad>(64); }, true);
    report("ga-da on royal road 64 within 100k evals", wins >= 9,
           std::to_string(wins) + "/10 solved");
}

void criterion_uf20() {
    auto cfg = nade_config();
    cfg.population = 100;
    cfg.hidden_units = 32;
    cfg.epochs = 3;
    cfg.learning_rate = 0.05;
    cfg.max_evals = 50000;
    const int wins =
        solve_count(cfg, [] { return std::make_shared<MaxSat>(load_dimacs("data/uf20-91.cnf")); },
                    false);
    report("ga-nade on uf20-91 within 50k evals", wins == 10, std::to_string(wins) + "/10 solved");
}

void criterion_hiff() {
    auto da_cfg = da_config();
    da_cfg.population = 500;
    da_cfg.learning_rate = 0.5;
    da_cfg.corruption = 0.25;
    da_cfg.max_evals = 200000;
    const int da_wins = solve_count(da_cfg, [] { return std::make_shared<Hiff>(64); }, true);
    report("ga-da on hiff 64 within 200k evals", da_wins >= 9, std::to_string(da_wins) + "/10 solved");

    auto nade_cfg = nade_config();
    nade_cfg.max_evals = 200000;
    const int nade_wins = solve_count(nade_cfg, [] { return std::make_shared<Hiff>(64); }, true);
    report("ga-nade on hiff 64 within 200k evals", nade_wins >= 9,
           std::to_string(nade_wins) + "/10 solved");

    OptimizerConfig pbil_cfg;
    pbil_cfg.model_kind = ModelKind::pbil;
    pbil_cfg.population = 200;
    pbil_cfg.max_evals = 200000;
    const int pbil_wins = solve_count(pbil_cfg, [] { return std::make_shared<Hiff>(64); }, false);
    report("pbil on hiff 64 within 200k evals (expected to fail)", pbil_wins <= 2,
           std::to_string(pbil_wins) + "/10 solved");
}

OptimizerConfig rrl_config() {
    auto cfg = nade_config();
    cfg.population = 500;
    cfg.epochs = 3;
    cfg.learning_rate = 0.05;
    cfg.max_evals = 500000;
    return cfg;
}

void criterion_rrl() {
    const int wins = solve_count(rrl_config(), [] { return std::make_shared<RrLinkages>(4, 4); },
                                 true);
    report("ga-nade on rr-linkages (4,4), P=500, within 500k evals", wins >= 8,
           std::to_string(wins) + "/10 solved");
}

// ---------------------------------------------------------------- criterion 4

void criterion_covariance() {
    // unmasked run so the indicator groups address raw loci
    std::shared_ptr<NadeModel> model;
    for (std::uint64_t seed = 1; seed <= 10 && !model; ++seed) {
        auto problem = std::make_shared<RrLinkages>(4, 4);
        const auto outcome = solve_trial(rrl_config(), problem, seed, false);
        if (outcome.success) model = outcome.nade;
    }
    if (!model) {
        report("rr-linkages covariance signs", false, "no successful ga-nade run to analyze");
        return;
    }
    RngStream rng(77);
    auto sample_rng = rng.substream("sampling");
    std::vector<Bits> samples;
    const std::size_t n = 10000;
    samples.reserve(n);
    for (std::size_t s = 0; s < n; ++s) samples.push_back(model->sample(sample_rng));

    const std::size_t k = 4, parts = 4;
    std::vector<IndicatorGroup> groups;
    for (std::size_t j = 0; j < parts; ++j) {
        IndicatorGroup left, right;
        for (std::size_t i = 0; i < k; ++i) {
            left.indices.push_back(2 * k * j + i);
            right.indices.push_back(2 * k * j + k + i);
        }
        left.label = "left" + std::to_string(j);
        right.label = "right" + std::to_string(j);
        groups.push_back(left);
        groups.push_back(right);
    }
    const auto cov = analyze_covariance(samples, groups);

    bool within_negative = true;
    std::string detail;
    for (std::size_t j = 0; j < parts; ++j) {
        const double c = cov[2 * j][2 * j + 1];
        within_negative = within_negative && c < 0;
        detail += (j ? " " : "") + format_number(c);
    }
    const double global = cov[0][2 * (parts - 1) + 1]; // first left vs last right
    report("rr-linkages within-partition covariance strictly negative", within_negative, detail);
    report("rr-linkages first-left/last-right covariance positive", global > 0,
           "cov = " + format_number(global));
}

// ---------------------------------------------------------------- criterion 5

void criterion_clamp_marginals() {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RngStream rng(seed + 300);
        const std::size_t dim = 8;
        NadeModel m(dim, 4, 0.1, rng);
        const auto table = m.exact_distribution();
        std::vector<double> marginal(dim, 0.0);
        for (std::size_t idx = 0; idx < table.size(); ++idx)
            for (std::size_t i = 0; i < dim; ++i)
                if ((idx >> i) & 1) marginal[i] += table[idx];

        for (std::size_t suffix_start = 1; suffix_start < dim; ++suffix_start) {
            ClampSpec clamp(dim, -1);
            for (std::size_t i = suffix_start; i < dim; ++i) clamp[i] = int(i % 2);
            // exact clamped law: product of the free-position conditionals
            std::vector<double> clamped(suffix_start, 0.0);
            for (std::size_t prefix = 0; prefix < (std::size_t{1} << suffix_start); ++prefix) {
                Bits x(dim);
                for (std::size_t i = 0; i < suffix_start; ++i) x[i] = (prefix >> i) & 1;
                for (std::size_t i = suffix_start; i < dim; ++i) x[i] = std::uint8_t(clamp[i]);
                double p = 1.0;
                for (std::size_t i = 0; i < suffix_start; ++i) {
                    const double p1 = m.conditional_probability(x, i);
                    p *= x[i] ? p1 : 1.0 - p1;
                }
                for (std::size_t i = 0; i < suffix_start; ++i)
                    if (x[i]) clamped[i] += p;
            }
            for (std::size_t i = 0; i < suffix_start; ++i)
                worst = std::max(worst, std::abs(clamped[i] - marginal[i]));
        }
    }
    report("nade suffix clamp leaves exact prefix marginals unchanged", worst < 1e-10,
           "max |difference| = " + std::to_string(worst));
}

// ---------------------------------------------------------------- criterion 6

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "neda_acceptance_determinism";
    std::filesystem::remove_all(dir);
    std::stringstream text;
    text << "[experiment]\n"
         << "problem = hiff:32\n"
         << "trials = 3\n"
         << "base_seed = 11\n"
         << "[ga]\nP = 50\nevals = 5000\n"
         << "[nade]\nP = 50\nH = 16\nevals = 5000\n";
    auto make_spec = [&] {
        std::stringstream in(text.str());
        auto spec = ExperimentSpec::from_config(ConfigFile::parse(in));
        spec.output_dir = dir.string();
        return spec;
    };
    run_experiment(make_spec(), worker_count());
    const auto records = slurp(dir / "records.csv");
    const auto summary = slurp(dir / "summary.csv");
    run_experiment(make_spec(), 1);
    const bool same = records == slurp(dir / "records.csv") && summary == slurp(dir / "summary.csv");
    std::filesystem::remove_all(dir);
    report("byte-identical records.csv and summary.csv on re-run", same,
           same ? "outputs identical across job counts" : "outputs differ");
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    auto enabled = [&](int c) {
        return wanted.empty() || std::find(wanted.begin(), wanted.end(), c) != wanted.end();
    };

    if (enabled(1)) {
        criterion_normalization();
        criterion_gradients();
        criterion_sampler_tv();
    }
    if (enabled(2)) criterion_problems();
    if (enabled(3)) {
        criterion_royal_road();
        criterion_uf20();
        criterion_hiff();
        criterion_rrl();
    }
    if (enabled(4)) criterion_covariance();
    if (enabled(5)) criterion_clamp_marginals();
    if (enabled(6)) criterion_determinism();

    std::printf("%s: %d criterion check(s) failed\n", failures ? "RESULT" : "RESULT", failures);
    return failures ? 1 : 0;
}
