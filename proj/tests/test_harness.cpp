#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "neda/analysis.hpp"
#include "neda/experiment.hpp"

using namespace neda;

namespace {

std::string slurp_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
        : path(std::filesystem::temp_directory_path() / ("neda_test_" + tag)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ExperimentSpec parse_spec(const std::string& text) {
    std::stringstream in(text);
    return ExperimentSpec::from_config(ConfigFile::parse(in));
}

} // namespace

TEST_CASE("config file parsing") {
    SUBCASE("sections, comments and lists") {
        std::stringstream in("# header comment\n"
                             "[experiment]\n"
                             "problem = maxones:8   # trailing comment\n"
                             "trials = 3\n"
                             "\n"
                             "[ga]\n"
                             "P = 20, 40\n");
        const auto cfg = ConfigFile::parse(in);
        REQUIRE(cfg.sections().size() == 2);
        CHECK(cfg.find_section("experiment")->find("problem")->front() == "maxones:8");
        const auto* p = cfg.find_section("ga")->find("P");
        REQUIRE(p);
        CHECK(*p == std::vector<std::string>{"20", "40"});
        CHECK(cfg.find_section("ga")->find("missing") == nullptr);
    }
    SUBCASE("unclosed section header") {
        std::stringstream in("[experiment\nproblem = maxones:8\n");
        CHECK_THROWS_AS(ConfigFile::parse(in), std::runtime_error);
    }
    SUBCASE("key outside any section") {
        std::stringstream in("problem = maxones:8\n");
        CHECK_THROWS_AS(ConfigFile::parse(in), std::runtime_error);
    }
}

TEST_CASE("experiment spec construction") {
    SUBCASE("algorithm kind from section name or explicit key") {
        const auto spec = parse_spec("[experiment]\n"
                                     "problem = maxones:8\n"
                                     "trials = 2\n"
                                     "base_seed = 7\n"
                                     "[ga]\n"
                                     "P = 20\n"
                                     "[da-tuned]\n"
                                     "algorithm = da\n"
                                     "mask = off\n");
        CHECK(spec.trials == 2);
        CHECK(spec.base_seed == 7);
        REQUIRE(spec.algorithms.size() == 2);
        CHECK(spec.algorithms[0].kind == ModelKind::ga);
        CHECK(spec.algorithms[0].mask);
        CHECK(spec.algorithms[1].kind == ModelKind::da);
        CHECK(spec.algorithms[1].label == "da-tuned");
        CHECK_FALSE(spec.algorithms[1].mask);
    }
    SUBCASE("list values expand to a Cartesian grid") {
        const auto spec = parse_spec("[experiment]\n"
                                     "problem = maxones:8\n"
                                     "[ga]\n"
                                     "P = 20, 40\n"
                                     "mutation = 0.01, 0.02, 0.05\n");
        REQUIRE(spec.algorithms.size() == 1);
        CHECK(spec.algorithms[0].cells.size() == 6);
        CHECK(spec.algorithms[0].cells.front().description == "P=20;mutation=0.01");
        CHECK(spec.algorithms[0].cells.back().config.population == 40);
        CHECK(spec.algorithms[0].cells.back().config.mutation_rate == doctest::Approx(0.05));
    }
    SUBCASE("missing experiment section") {
        std::stringstream in("[ga]\nP = 20\n");
        auto cfg = ConfigFile::parse(in);
        CHECK_THROWS_AS(ExperimentSpec::from_config(cfg), std::runtime_error);
    }
    SUBCASE("unknown algorithm and config key") {
        CHECK_THROWS_AS(parse_spec("[experiment]\nproblem = maxones:8\n[simplex]\nP = 10\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_spec("[experiment]\nproblem = maxones:8\n[ga]\nQ = 10\n"),
                        std::invalid_argument);
    }
}

TEST_CASE("problem factory") {
    CHECK(make_problem("maxones:10")->dimension() == 10);
    CHECK(make_problem("hiff:32")->optimum() == 192);
    CHECK(make_problem("royalroad:64")->optimum() == 64);
    CHECK(make_problem("royalroad:64:16")->optimum() == 64);
    CHECK(make_problem("rrl:4:4")->optimum() == 5);
    CHECK(make_problem("maxsat:data/uf20-91.cnf")->dimension() == 20);
    CHECK(make_problem("knapsack:data/knapsack105.kp")->dimension() == 105);
    CHECK(make_problem("randomknapsack:30:2:9")->dimension() == 30);
    CHECK_THROWS_AS(make_problem("maxcut:10"), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("maxones"), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("maxones:abc"), std::invalid_argument);

    CHECK(problem_maskable("hiff:64"));
    CHECK(problem_maskable("royalroad:64"));
    CHECK(problem_maskable("rrl:4:4"));
    CHECK_FALSE(problem_maskable("maxones:10"));
    CHECK_FALSE(problem_maskable("knapsack:data/knapsack105.kp"));
}

TEST_CASE("run_experiment") {
    TempDir tmp("experiment");
    auto spec = parse_spec("[experiment]\n"
                           "problem = maxones:12\n"
                           "trials = 4\n"
                           "base_seed = 3\n"
                           "[ga]\n"
                           "P = 20\n"
                           "evals = 4000\n"
                           "[pbil]\n"
                           "P = 20\n"
                           "evals = 4000\n");
    spec.output_dir = (tmp.path / "out").string();

    const auto result = run_experiment(spec);
    SUBCASE("both algorithms solve an easy problem on every trial") {
        REQUIRE(result.summaries.size() == 2);
        for (const auto& row : result.summaries) {
            CHECK(row.success_pct == 100.0);
            CHECK(row.min_fitness == 12);
            CHECK(row.max_fitness == 12);
            CHECK(row.sd_fitness == 0);
        }
    }
    SUBCASE("summary rows match an independent recomputation") {
        for (std::size_t a = 0; a < result.records.size(); ++a) {
            const auto& runs = result.records[a];
            double mean = 0, mean_evals = 0;
            for (const auto& r : runs) {
                mean += *r.best.fitness;
                mean_evals += double(r.success ? r.evals_used : r.config.max_evals);
            }
            mean /= double(runs.size());
            mean_evals /= double(runs.size());
            CHECK(result.summaries[a].mean_fitness == doctest::Approx(mean));
            CHECK(result.summaries[a].mean_evals == doctest::Approx(mean_evals));
        }
    }
    SUBCASE("csv artifacts are byte-identical across re-runs and job counts") {
        const auto records_1 = slurp_file(tmp.path / "out/records.csv");
        const auto summary_1 = slurp_file(tmp.path / "out/summary.csv");
        CHECK(records_1.rfind("algorithm,trial,generation,evals,best_fitness\n", 0) == 0);
        CHECK(summary_1.rfind("algorithm,min,max,mean,sd,mean_evals,sd_evals,success_pct\n", 0) == 0);

        run_experiment(spec);
        CHECK(slurp_file(tmp.path / "out/records.csv") == records_1);
        CHECK(slurp_file(tmp.path / "out/summary.csv") == summary_1);

        run_experiment(spec, 3);
        CHECK(slurp_file(tmp.path / "out/records.csv") == records_1);
        CHECK(slurp_file(tmp.path / "out/summary.csv") == summary_1);
    }
    SUBCASE("list values are rejected outside the grid subcommand") {
        auto bad = parse_spec("[experiment]\n"
                              "problem = maxones:8\n"
                              "[ga]\n"
                              "P = 20, 40\n");
        bad.output_dir = (tmp.path / "bad").string();
        CHECK_THROWS_AS(run_experiment(bad), std::runtime_error);
    }
}

TEST_CASE("saved model checkpoints are loadable") {
    TempDir tmp("ckpt");
    auto spec = parse_spec("[experiment]\n"
                           "problem = maxones:10\n"
                           "trials = 2\n"
                           "save_models = on\n"
                           "[nade]\n"
                           "P = 20\n"
                           "H = 8\n"
                           "evals = 400\n"
                           "[da]\n"
                           "P = 20\n"
                           "H = 8\n"
                           "evals = 400\n"
                           "[ga]\n"
                           "P = 20\n"
                           "evals = 400\n");
    spec.output_dir = (tmp.path / "out").string();
    run_experiment(spec);
    for (int t = 0; t < 2; ++t) {
        std::ifstream nade_in(tmp.path / "out/models" / ("nade_trial" + std::to_string(t) + ".ckpt"));
        REQUIRE(nade_in.good());
        CHECK(NadeModel::load(nade_in).dimension() == 10);
        std::ifstream da_in(tmp.path / "out/models" / ("da_trial" + std::to_string(t) + ".ckpt"));
        REQUIRE(da_in.good());
        CHECK(DaModel::load(da_in).dimension() == 10);
    }
    // baselines have no model to save
    CHECK_FALSE(std::filesystem::exists(tmp.path / "out/models/ga_trial0.ckpt"));
}

TEST_CASE("optimum override stops runs early") {
    TempDir tmp("override");
    auto spec = parse_spec("[experiment]\n"
                           "problem = maxones:20\n"
                           "trials = 3\n"
                           "optimum = 15\n"
                           "[ga]\n"
                           "P = 20\n"
                           "evals = 4000\n");
    spec.output_dir = (tmp.path / "out").string();
    const auto result = run_experiment(spec);
    CHECK(result.summaries[0].success_pct == 100.0);
    for (const auto& r : result.records[0]) CHECK(*r.best.fitness >= 15);
}

TEST_CASE("grid search") {
    TempDir tmp("grid");
    SUBCASE("a single cell is its own winner") {
        auto spec = parse_spec("[experiment]\n"
                               "problem = maxones:10\n"
                               "[ga]\n"
                               "P = 20\n"
                               "evals = 2000\n");
        spec.output_dir = (tmp.path / "single").string();
        const auto result = grid_search(spec);
        REQUIRE(result.cells.size() == 1);
        REQUIRE(result.winners.size() == 1);
        CHECK(result.winners[0].description == "P=20;evals=2000");
    }
    SUBCASE("the dominant budget wins on mean fitness") {
        auto spec = parse_spec("[experiment]\n"
                               "problem = maxones:40\n"
                               "[ga]\n"
                               "P = 20\n"
                               "evals = 100, 20000\n");
        spec.output_dir = (tmp.path / "dominant").string();
        const auto result = grid_search(spec);
        REQUIRE(result.cells.size() == 2);
        CHECK(result.winners[0].description == "P=20;evals=20000");
        CHECK(result.winners[0].mean_fitness > result.cells[0].mean_fitness);
    }
    SUBCASE("exact ties fall back to lexicographic description order") {
        // both budgets are generous, so fitness and evals-to-optimum tie
        auto spec = parse_spec("[experiment]\n"
                               "problem = maxones:8\n"
                               "[ga]\n"
                               "P = 20\n"
                               "evals = 5000, 10000\n");
        spec.output_dir = (tmp.path / "tie").string();
        const auto result = grid_search(spec);
        REQUIRE(result.cells.size() == 2);
        CHECK(result.cells[0].mean_fitness == result.cells[1].mean_fitness);
        CHECK(result.cells[0].mean_evals == result.cells[1].mean_evals);
        CHECK(result.winners[0].description == "P=20;evals=10000");
    }
    SUBCASE("grid csv marks exactly one winner per algorithm") {
        auto spec = parse_spec("[experiment]\n"
                               "problem = maxones:10\n"
                               "[ga]\n"
                               "P = 20\n"
                               "mutation = 0.01, 0.05\n");
        spec.output_dir = (tmp.path / "csv").string();
        grid_search(spec);
        const auto text = slurp_file(tmp.path / "csv/grid.csv");
        CHECK(text.rfind("algorithm,config,mean_fitness,mean_evals,winner\n", 0) == 0);
        std::size_t winners = 0, pos = 0;
        while ((pos = text.find(",1\n", pos)) != std::string::npos) {
            ++winners;
            pos += 3;
        }
        CHECK(winners == 1);
    }
}

TEST_CASE("covariance of indicator groups") {
    SUBCASE("diagonal is the binomial variance") {
        // indicator true on 1 of 4 samples: var = 0.25 * 0.75
        std::vector<Bits> samples{{1, 0}, {0, 0}, {0, 1}, {0, 0}};
        const auto cov = analyze_covariance(samples, {{{0}, GroupPredicate::all_ones, "a"}});
        CHECK(cov[0][0] == doctest::Approx(0.25 * 0.75));
    }
    SUBCASE("mutually exclusive groups are negatively covariant") {
        // exactly one of the two bits set in every sample
        std::vector<Bits> samples{{1, 0}, {0, 1}, {1, 0}, {0, 1}};
        const auto cov = analyze_covariance(samples, {{{0}, GroupPredicate::all_ones, "a"},
                                                      {{1}, GroupPredicate::all_ones, "b"}});
        CHECK(cov[0][1] == doctest::Approx(-0.25));
        CHECK(cov[0][1] == cov[1][0]);
    }
    SUBCASE("independent groups have near-zero covariance") {
        RngStream rng(3);
        std::vector<Bits> samples;
        const std::size_t n = 40000;
        for (std::size_t s = 0; s < n; ++s) samples.push_back({rng.random_bit(), rng.random_bit()});
        const auto cov = analyze_covariance(samples, {{{0}, GroupPredicate::all_ones, "a"},
                                                      {{1}, GroupPredicate::all_ones, "b"}});
        // |cov| < 3 standard errors of the product estimate (~0.25 / sqrt(n))
        CHECK(std::abs(cov[0][1]) < 3 * 0.25 / std::sqrt(double(n)));
    }
    SUBCASE("all-zeros predicate") {
        std::vector<Bits> samples{{0, 0}, {0, 0}, {1, 1}, {1, 0}};
        const auto cov = analyze_covariance(samples, {{{0, 1}, GroupPredicate::all_zeros, "z"}});
        CHECK(cov[0][0] == doctest::Approx(0.5 * 0.5));
    }
    SUBCASE("input validation") {
        std::vector<Bits> one{{1, 0}};
        CHECK_THROWS_AS(analyze_covariance(one, {{{0}, GroupPredicate::all_ones, "a"}}),
                        std::invalid_argument);
        std::vector<Bits> two{{1, 0}, {0, 1}};
        CHECK_THROWS_AS(analyze_covariance(two, {{{}, GroupPredicate::all_ones, "empty"}}),
                        std::invalid_argument);
    }
}

TEST_CASE("nearest-neighbour diversity") {
    SUBCASE("identical samples have zero distance") {
        std::vector<Genotype> samples(8, Genotype::from_string("1010"));
        const auto report = analyze_diversity(samples, 5);
        for (auto d : report.mean_knn_distance) CHECK(d == 0);
    }
    SUBCASE("the full 4-bit hypercube has mean 4-NN distance one") {
        // every vertex has exactly 4 neighbours at Hamming distance 1
        std::vector<Genotype> samples;
        for (std::size_t v = 0; v < 16; ++v) {
            Bits b(4);
            for (std::size_t i = 0; i < 4; ++i) b[i] = (v >> i) & 1;
            samples.emplace_back(std::move(b));
        }
        const auto report = analyze_diversity(samples, 4);
        for (auto d : report.mean_knn_distance) CHECK(d == doctest::Approx(1.0));
    }
    SUBCASE("fitness column carries NaN for unevaluated members") {
        std::vector<Genotype> samples(6, Genotype::from_string("01"));
        samples[0].fitness = 3.5;
        const auto report = analyze_diversity(samples, 5);
        CHECK(report.fitness[0] == 3.5);
        CHECK(std::isnan(report.fitness[1]));
    }
    SUBCASE("requires more samples than k") {
        std::vector<Genotype> samples(5, Genotype::from_string("01"));
        CHECK_THROWS_AS(analyze_diversity(samples, 5), std::invalid_argument);
    }
}

TEST_CASE("clamp studies") {
    SUBCASE("nade: clamped loci are pinned, free loci stay uniform at zero parameters") {
        RngStream rng(5);
        NadeModel model(6, 4, 0.1, rng);
        std::fill(model.shared_weights().begin(), model.shared_weights().end(), 0.0);
        std::fill(model.visible_bias().begin(), model.visible_bias().end(), 0.0);
        std::fill(model.hidden_bias().begin(), model.hidden_bias().end(), 0.0);
        std::fill(model.output_weights().begin(), model.output_weights().end(), 0.0);
        ClampSpec clamp{1, -1, 0, -1, -1, 1};
        const auto study = clamp_study(model, clamp, 20000, rng,
                                       {{{0, 5}, GroupPredicate::all_ones, "ends"}});
        CHECK(study.sample_count == 20000);
        CHECK(study.locus_one_probability[0] == 1.0);
        CHECK(study.locus_one_probability[2] == 0.0);
        CHECK(study.locus_one_probability[5] == 1.0);
        for (auto i : {1, 3, 4}) CHECK(std::abs(study.locus_one_probability[i] - 0.5) < 0.02);
        CHECK(study.group_frequency[0] == 1.0); // both group loci clamped to one
    }
    SUBCASE("da: saturated decoder bias pins the outputs regardless of the clamp") {
        RngStream rng(7);
        DaModel model(4, 3, 0.5, 0.1, rng);
        std::fill(model.encoder_weights().begin(), model.encoder_weights().end(), 0.0);
        std::fill(model.decoder_weights().begin(), model.decoder_weights().end(), 0.0);
        for (auto& b : model.decoder_bias()) b = 25.0;
        const auto study = clamp_study(model, ClampSpec{0, -1, -1, 1}, 500, rng,
                                       {{{0, 1, 2, 3}, GroupPredicate::all_ones, "all"}});
        for (auto p : study.locus_one_probability) CHECK(p == 1.0);
        CHECK(study.group_frequency[0] == 1.0);
    }
    SUBCASE("da: input clamping shifts reconstructions of a trained identity map") {
        // train without corruption so the map reconstructs its input, then
        // compare studies with the first input bit clamped to 0 vs 1
        RngStream rng(9);
        DaModel model(8, 16, 0.0, 0.1, rng);
        std::vector<Bits> batch;
        for (int i = 0; i < 40; ++i) {
            Bits b(8);
            for (auto& bit : b) bit = rng.random_bit();
            batch.push_back(std::move(b));
        }
        RngStream train_rng(10);
        for (int epoch = 0; epoch < 3000; ++epoch) model.train_minibatch(batch, train_rng);
        ClampSpec zero(8, -1), one(8, -1);
        zero[0] = 0;
        one[0] = 1;
        RngStream s1(11), s2(11);
        const auto low = clamp_study(model, zero, 4000, s1);
        const auto high = clamp_study(model, one, 4000, s2);
        CHECK(high.locus_one_probability[0] - low.locus_one_probability[0] > 0.3);
    }
    SUBCASE("clamp length mismatch") {
        RngStream rng(13);
        DaModel model(4, 2, 0.1, 0.1, rng);
        CHECK_THROWS_AS(clamp_study(model, ClampSpec{1, 0}, 10, rng), std::invalid_argument);
    }
}
