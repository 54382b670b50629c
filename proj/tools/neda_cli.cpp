// Command-line harness: seeded experiment runs, grid search, model sampling
// and the covariance / diversity / clamp analyses, all emitting CSV.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neda/neda.hpp"

namespace {

using namespace neda;

// A loaded model checkpoint of either family.
struct ModelSnapshot {
    std::shared_ptr<DaModel> da;
    std::shared_ptr<NadeModel> nade;

    std::size_t dimension() const { return da ? da->dimension() : nade->dimension(); }

    Bits draw(RngStream& rng, const ClampSpec& clamp = {}) const {
        if (nade) return nade->sample(rng, clamp);
        Bits input(da->dimension());
        for (auto& b : input) b = rng.random_bit();
        Bits noisy = corrupt(input, da->corruption_level(), rng, da->corruption_kind());
        for (std::size_t i = 0; i < clamp.size(); ++i)
            if (clamp[i] >= 0) noisy[i] = static_cast<std::uint8_t>(clamp[i]);
        const auto y = da->forward(noisy);
        Bits out(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = rng.bernoulli(y[i]) ? 1 : 0;
        return out;
    }
};

ModelSnapshot load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string magic;
    in >> magic;
    in.seekg(0);
    ModelSnapshot snap;
    if (magic == "neda-da")
        snap.da = std::make_shared<DaModel>(DaModel::load(in));
    else if (magic == "neda-nade")
        snap.nade = std::make_shared<NadeModel>(NadeModel::load(in));
    else
        throw std::runtime_error("unrecognized checkpoint format: " + path);
    return snap;
}

// Relative output paths land under $NEDA_OUTPUT_ROOT when it is set.
std::string resolve_output(const std::string& dir) {
    const char* root = std::getenv("NEDA_OUTPUT_ROOT");
    if (!root || *root == '\0' || std::filesystem::path(dir).is_absolute()) return dir;
    return (std::filesystem::path(root) / dir).string();
}

// "0,3-5:ones" -> indices {0,3,4,5} with the all-ones predicate
IndicatorGroup parse_group(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw std::runtime_error("group '" + text + "': expected indices:ones|zeros");
    IndicatorGroup group;
    group.label = text;
    const std::string pred = text.substr(colon + 1);
    if (pred == "ones") group.predicate = GroupPredicate::all_ones;
    else if (pred == "zeros") group.predicate = GroupPredicate::all_zeros;
    else throw std::runtime_error("group '" + text + "': predicate must be ones or zeros");
    for (const auto& part : detail::split(text.substr(0, colon), ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            group.indices.push_back(std::stoul(part));
        } else {
            std::size_t lo = std::stoul(part.substr(0, dash));
            std::size_t hi = std::stoul(part.substr(dash + 1));
            if (lo > hi) throw std::runtime_error("group '" + text + "': descending range");
            for (std::size_t i = lo; i <= hi; ++i) group.indices.push_back(i);
        }
    }
    return group;
}

// "0=1,5=0" -> clamp vector with -1 everywhere else
ClampSpec parse_clamp(const std::string& text, std::size_t dim) {
    ClampSpec clamp(dim, -1);
    if (text.empty()) return clamp;
    for (const auto& part : detail::split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("clamp '" + text + "': expected index=bit pairs");
        const std::size_t index = std::stoul(part.substr(0, eq));
        const int value = std::stoi(part.substr(eq + 1));
        if (index >= dim || (value != 0 && value != 1))
            throw std::runtime_error("clamp '" + text + "': index or bit out of range");
        clamp[index] = value;
    }
    return clamp;
}

void print_summaries(const std::vector<SummaryRow>& rows) {
    std::cout << "algorithm,min,max,mean,sd,mean_evals,sd_evals,success_pct\n";
    for (const auto& r : rows)
        std::cout << r.algorithm << ',' << format_number(r.min_fitness) << ','
                  << format_number(r.max_fitness) << ',' << format_number(r.mean_fitness) << ','
                  << format_number(r.sd_fitness) << ',' << format_number(r.mean_evals) << ','
                  << format_number(r.sd_evals) << ',' << format_number(r.success_pct) << '\n';
}

int cmd_run(const std::string& spec_path, std::size_t jobs, const std::string& output_override) {
    auto spec = ExperimentSpec::from_config(ConfigFile::load(spec_path));
    if (!output_override.empty()) spec.output_dir = output_override;
    spec.output_dir = resolve_output(spec.output_dir);
    const auto result = run_experiment(spec, jobs);
    print_summaries(result.summaries);
    std::cout << "wrote " << spec.output_dir << "/records.csv and summary.csv\n";
    return 0;
}

int cmd_grid(const std::string& spec_path, std::size_t jobs, const std::string& output_override,
             std::size_t trials_per_cell) {
    auto spec = ExperimentSpec::from_config(ConfigFile::load(spec_path));
    if (!output_override.empty()) spec.output_dir = output_override;
    spec.output_dir = resolve_output(spec.output_dir);
    const auto result = grid_search(spec, jobs, true, trials_per_cell);
    std::cout << "algorithm,winner,mean_fitness,mean_evals\n";
    for (const auto& w : result.winners)
        std::cout << w.algorithm << ",\"" << w.description << "\"," << format_number(w.mean_fitness)
                  << ',' << format_number(w.mean_evals) << '\n';
    std::cout << "wrote " << spec.output_dir << "/grid.csv\n";
    return 0;
}

int cmd_sample(const std::string& checkpoint, std::size_t n, std::uint64_t seed,
               const std::string& out_dir) {
    const auto model = load_model(checkpoint);
    const std::string dir = resolve_output(out_dir);
    std::filesystem::create_directories(dir);
    RngStream rng(seed);
    auto sample_rng = rng.substream("sampling");
    CsvWriter csv(dir + "/samples.csv", {"sample", "genotype"});
    for (std::size_t s = 0; s < n; ++s)
        csv.write_row({std::to_string(s), Genotype(model.draw(sample_rng)).to_string()});
    std::cout << "wrote " << dir << "/samples.csv (" << n << " samples)\n";
    return 0;
}

int cmd_analyze_cov(const std::string& checkpoint, std::size_t n, std::uint64_t seed,
                    const std::vector<std::string>& group_args, const std::string& out_dir) {
    const auto model = load_model(checkpoint);
    std::vector<IndicatorGroup> groups;
    for (const auto& g : group_args) groups.push_back(parse_group(g));
    if (groups.empty()) throw std::runtime_error("analyze cov: at least one --group is required");
    RngStream rng(seed);
    auto sample_rng = rng.substream("sampling");
    std::vector<Bits> samples;
    samples.reserve(n);
    for (std::size_t s = 0; s < n; ++s) samples.push_back(model.draw(sample_rng));
    const auto cov = analyze_covariance(samples, groups);

    const std::string dir = resolve_output(out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> header{"group"};
    for (const auto& g : groups) header.push_back(g.label);
    CsvWriter csv(dir + "/analysis_cov.csv", header);
    for (std::size_t a = 0; a < groups.size(); ++a) {
        std::vector<std::string> row{groups[a].label};
        for (std::size_t b = 0; b < groups.size(); ++b) row.push_back(format_number(cov[a][b]));
        csv.write_row(row);
    }
    std::cout << "wrote " << dir << "/analysis_cov.csv\n";
    return 0;
}

int cmd_analyze_diversity(const std::string& checkpoint, std::size_t n, std::size_t k,
                          std::uint64_t seed, const std::string& problem_id,
                          const std::string& out_dir) {
    const auto model = load_model(checkpoint);
    std::shared_ptr<Problem> problem = problem_id.empty() ? nullptr : make_problem(problem_id);
    RngStream rng(seed);
    auto sample_rng = rng.substream("sampling");
    std::vector<Genotype> samples;
    samples.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        Genotype g(model.draw(sample_rng));
        if (problem) evaluate(*problem, g);
        samples.push_back(std::move(g));
    }
    const auto report = analyze_diversity(samples, k);

    const std::string dir = resolve_output(out_dir);
    std::filesystem::create_directories(dir);
    CsvWriter csv(dir + "/analysis_diversity.csv", {"sample", "mean_knn_distance", "fitness"});
    for (std::size_t s = 0; s < samples.size(); ++s)
        csv.write_row({std::to_string(s), format_number(report.mean_knn_distance[s]),
                       format_number(report.fitness[s])});
    std::cout << "wrote " << dir << "/analysis_diversity.csv\n";
    return 0;
}

int cmd_analyze_clamp(const std::string& checkpoint, std::size_t n, std::uint64_t seed,
                      const std::string& clamp_text, const std::vector<std::string>& group_args,
                      const std::string& out_dir) {
    const auto model = load_model(checkpoint);
    const auto clamp = parse_clamp(clamp_text, model.dimension());
    std::vector<IndicatorGroup> groups;
    for (const auto& g : group_args) groups.push_back(parse_group(g));
    RngStream rng(seed);
    auto sample_rng = rng.substream("sampling");
    const ClampStudy study = model.nade
                                 ? clamp_study(*model.nade, clamp, n, sample_rng, groups)
                                 : clamp_study(*model.da, clamp, n, sample_rng, groups);

    const std::string dir = resolve_output(out_dir);
    std::filesystem::create_directories(dir);
    CsvWriter csv(dir + "/analysis_clamp.csv", {"locus", "clamped", "one_probability"});
    for (std::size_t i = 0; i < study.locus_one_probability.size(); ++i)
        csv.write_row({std::to_string(i), clamp[i] >= 0 ? std::to_string(clamp[i]) : "-",
                       format_number(study.locus_one_probability[i])});
    for (std::size_t g = 0; g < groups.size(); ++g)
        std::cout << "group " << groups[g].label << " frequency "
                  << format_number(study.group_frequency[g]) << '\n';
    std::cout << "wrote " << dir << "/analysis_clamp.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural estimation-of-distribution optimizer harness"};
    app.require_subcommand(1);
    app.fallthrough(); // allow --jobs/--output after the subcommand name

    std::size_t jobs = 1;
    std::string output_override;
    app.add_option("--jobs", jobs, "parallel trial workers")->capture_default_str();
    app.add_option("--output", output_override, "override the spec's output directory");

    std::string run_spec;
    auto* run = app.add_subcommand("run", "run every algorithm in an experiment file");
    run->add_option("spec", run_spec, "experiment file")->required();

    std::string grid_spec;
    std::size_t trials_per_cell = 3;
    auto* grid = app.add_subcommand("grid", "grid-search list-valued keys in an experiment file");
    grid->add_option("spec", grid_spec, "experiment file")->required();
    grid->add_option("--trials-per-cell", trials_per_cell, "trials per grid cell")
        ->capture_default_str();

    std::string sample_ckpt, sample_dir = "out";
    std::size_t sample_n = 0;
    std::uint64_t sample_seed = 1;
    auto* sample = app.add_subcommand("sample", "draw genotypes from a model checkpoint");
    sample->add_option("checkpoint", sample_ckpt)->required();
    sample->add_option("n", sample_n, "number of samples")->required();
    sample->add_option("--seed", sample_seed)->capture_default_str();
    sample->add_option("--out", sample_dir)->capture_default_str();

    auto* analyze = app.add_subcommand("analyze", "model introspection analyses");
    analyze->require_subcommand(1);

    std::string cov_ckpt, cov_dir = "out";
    std::size_t cov_n = 10000;
    std::uint64_t cov_seed = 1;
    std::vector<std::string> cov_groups;
    auto* cov = analyze->add_subcommand("cov", "covariance of group indicators over model samples");
    cov->add_option("checkpoint", cov_ckpt)->required();
    cov->add_option("--samples", cov_n)->capture_default_str();
    cov->add_option("--seed", cov_seed)->capture_default_str();
    cov->add_option("--group", cov_groups, "indices:ones|zeros, e.g. 0-7:ones (repeatable)");
    cov->add_option("--out", cov_dir)->capture_default_str();

    std::string div_ckpt, div_problem, div_dir = "out";
    std::size_t div_n = 10000, div_k = 5;
    std::uint64_t div_seed = 1;
    auto* div = analyze->add_subcommand("diversity", "k-nearest-neighbour sample diversity");
    div->add_option("checkpoint", div_ckpt)->required();
    div->add_option("--samples", div_n)->capture_default_str();
    div->add_option("--k", div_k)->capture_default_str();
    div->add_option("--seed", div_seed)->capture_default_str();
    div->add_option("--problem", div_problem, "problem id used to evaluate sample fitness");
    div->add_option("--out", div_dir)->capture_default_str();

    std::string clamp_ckpt, clamp_text, clamp_dir = "out";
    std::size_t clamp_n = 10000;
    std::uint64_t clamp_seed = 1;
    std::vector<std::string> clamp_groups;
    auto* clamp = analyze->add_subcommand("clamp", "per-locus one-probabilities under a clamp");
    clamp->add_option("checkpoint", clamp_ckpt)->required();
    clamp->add_option("--clamp", clamp_text, "index=bit pairs, e.g. 0=1,5=0");
    clamp->add_option("--samples", clamp_n)->capture_default_str();
    clamp->add_option("--seed", clamp_seed)->capture_default_str();
    clamp->add_option("--group", clamp_groups, "indices:ones|zeros (repeatable)");
    clamp->add_option("--out", clamp_dir)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_spec, jobs, output_override);
        if (grid->parsed()) return cmd_grid(grid_spec, jobs, output_override, trials_per_cell);
        if (sample->parsed()) return cmd_sample(sample_ckpt, sample_n, sample_seed, sample_dir);
        if (cov->parsed()) return cmd_analyze_cov(cov_ckpt, cov_n, cov_seed, cov_groups, cov_dir);
        if (div->parsed())
            return cmd_analyze_diversity(div_ckpt, div_n, div_k, div_seed, div_problem, div_dir);
        if (clamp->parsed())
            return cmd_analyze_clamp(clamp_ckpt, clamp_n, clamp_seed, clamp_text, clamp_groups,
                                     clamp_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
