// Command-line front end: gen | cluster | filter | eval.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <mhpf/config.hpp>
#include <mhpf/mhpf.hpp>

namespace {

using namespace mhpf;

struct Output {
    std::ofstream file;
    std::ostream* stream = &std::cout;

    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file.open(path);
            if (!file) {
                throw invalid_input("cannot open '" + path + "' for writing");
            }
            stream = &file;
        }
    }
    std::ostream& operator*() { return *stream; }
};

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw invalid_input("cannot open '" + path + "'");
    }
    return in;
}

std::vector<Trajectory> load_trajectories(const std::string& path)
{
    auto in = open_input(path);
    auto ts = read_trajectories(in);
    if (ts.empty()) {
        throw invalid_input("'" + path + "' contains no trajectories");
    }
    return ts;
}

// Three single-point trajectories on a line; single linkage merges them at heights 1 and 2.
std::vector<Trajectory> hand_dataset()
{
    return {Trajectory{"a", {Point{0.0}}}, Trajectory{"b", {Point{1.0}}}, Trajectory{"c", {Point{3.0}}}};
}

struct GenArgs {
    std::string dataset = "obstacles";
    std::size_t count = 0;
    std::size_t points = 100;
    std::string grid;
    std::string grid_out;
    std::uint64_t seed = 1;
    std::string out = "-";
};

void cmd_gen(const GenArgs& a)
{
    if (a.dataset == "hand") {
        Output out(a.out);
        write_trajectories(*out, hand_dataset());
        return;
    }
    ExperimentConfig cfg;
    cfg.dataset = detail::checked_enum<DatasetKind>(nlohmann::json(a.dataset), "dataset");
    cfg.corpus_size = a.count;
    cfg.points = a.points;
    if (!a.grid.empty()) {
        auto in = open_input(a.grid);
        cfg.grid = read_grid(in);
    }
    Rng rng(a.seed);
    if (!a.grid_out.empty()) {
        if (cfg.dataset != DatasetKind::density_walk || cfg.grid) {
            throw invalid_input("--grid-out only applies to density_walk with a generated grid");
        }
        Rng grid_rng = rng.split(0x10);
        auto harbour = gen_harbour_grid(grid_rng);
        Output g(a.grid_out);
        write_grid(*g, harbour.grid);
    }
    const auto ts = make_corpus(cfg, rng.split(0x10));
    Output out(a.out);
    write_trajectories(*out, ts);
}

struct ClusterArgs {
    std::string input;
    std::string out = "-";
    std::string dendrogram;
    unsigned threads = 1;
};

void cmd_cluster(const ClusterArgs& a)
{
    const auto ts = load_trajectories(a.input);
    const auto tree = cluster_trajectories(ts, a.threads);
    {
        Output out(a.out);
        *out << to_json(tree).dump(2) << '\n';
    }
    if (!a.dendrogram.empty()) {
        Output d(a.dendrogram);
        write_dendrogram(*d, tree);
    }
}

struct FilterArgs {
    std::string corpus;
    std::string tree;
    std::string observations;
    std::string truth;
    std::string write_observations;
    std::size_t particles = 100;
    double depletion = 0.01;
    std::string resampling = "multinomial";
    double kappa = 0.3;
    std::optional<double> epsilon_floor;
    std::optional<double> epsilon;
    std::string noise = "one_sided";
    double psi = 0.01;
    double coarse_prob = 0.5;
    std::optional<double> coarse_level;
    std::size_t coarse_samples = 10;
    std::string mode = "mixed_random";
    double lead_in = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out = "-";
};

// Reorders `corpus` to the tree's leaf order, matching by trajectory id.
std::vector<Trajectory> align_to_tree(const std::vector<Trajectory>& corpus, const ClusterTree& tree)
{
    if (corpus.size() != tree.leaf_count()) {
        throw invalid_input("tree has " + std::to_string(tree.leaf_count()) + " leaves but the corpus has " +
                            std::to_string(corpus.size()) + " trajectories");
    }
    std::vector<Trajectory> out;
    for (const auto& label : tree.leaf_labels()) {
        const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const Trajectory& t) { return t.id == label; });
        if (it == corpus.end()) {
            throw invalid_input("tree leaf '" + label + "' has no trajectory in the corpus");
        }
        out.push_back(*it);
    }
    return out;
}

void cmd_filter(const FilterArgs& a)
{
    if (a.observations.empty() == a.truth.empty()) {
        throw invalid_input("give exactly one of --observations or --truth");
    }
    auto corpus = load_trajectories(a.corpus);
    std::shared_ptr<const ClusterTree> tree;
    if (!a.tree.empty()) {
        auto in = open_input(a.tree);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw invalid_input("'" + a.tree + "': " + e.what());
        }
        tree = std::make_shared<const ClusterTree>(tree_from_json(j));
        corpus = align_to_tree(corpus, *tree);
    } else {
        tree = std::make_shared<const ClusterTree>(cluster_trajectories(corpus, a.threads));
    }

    const Rng root(a.seed);
    std::vector<std::vector<Observation>> stream;
    if (!a.observations.empty()) {
        auto in = open_input(a.observations);
        stream = read_observations(in);
    } else {
        const auto truth = load_trajectories(a.truth);
        ObsConfig oc;
        oc.psi = a.psi;
        oc.coarse_prob = a.coarse_prob;
        oc.coarse_level = a.coarse_level;
        oc.n_coarse_samples = a.coarse_samples;
        oc.mode = detail::checked_enum<ObsMode>(nlohmann::json(a.mode), "mode");
        oc.lead_in_fraction = a.lead_in;
        oc.validate();
        const double level = a.coarse_level ? *a.coarse_level : default_coarse_level(*tree);
        const CoarseObserver observer(tree, corpus, level);
        stream = generate_stream(truth.front().points, oc, observer, bounding_diagonal(corpus), root.split(1));
        if (!a.write_observations.empty()) {
            Output o(a.write_observations);
            write_observations(*o, stream);
        }
    }
    if (stream.empty()) {
        throw invalid_input("observation stream is empty");
    }

    DynamicsConfig dc;
    dc.kappa = a.kappa;
    dc.epsilon_floor = a.epsilon_floor ? *a.epsilon_floor : 2.0 * mean_step_length(corpus);
    dc.global_epsilon = a.epsilon;
    dc.noise = detail::checked_enum<NoiseMode>(nlohmann::json(a.noise), "noise");
    const auto dynamics = std::make_shared<const DynamicsSet>(build_dynamics(*tree, corpus, dc));

    FilterConfig fc;
    fc.particles = a.particles;
    fc.depletion = a.depletion;
    fc.resampling = detail::checked_enum<ResamplingScheme>(nlohmann::json(a.resampling), "resampling");

    Point anchor = corpus.front().points.front();
    bool anchored = false;
    for (const auto& o : stream.front()) {
        if (const auto* f = std::get_if<FineObservation>(&o)) {
            anchor = f->position;
            anchored = true;
        }
    }
    if (!anchored) {
        std::cerr << "note: no fine observation at t=0; prior positions start at each trajectory's first point\n";
    }
    Prior prior = nearest_point_prior(corpus, anchor);
    if (!anchored) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            prior[i].position = corpus[i].points.front();
        }
    }

    FilterStack stack(tree, dynamics, prior, fc, root.split(2));
    Output out(a.out);
    *out << snapshot(stack).dump() << '\n';
    std::size_t extrapolated = 0, resets = 0;
    for (std::size_t t = 1; t < stream.size(); ++t) {
        const auto diag = stack.step(stream[t]);
        extrapolated += diag.extrapolated_steps;
        resets += diag.weight_reset ? 1 : 0;
        *out << snapshot(stack).dump() << '\n';
    }
    if (extrapolated || resets) {
        std::cerr << "note: " << extrapolated << " extrapolated particle moves, " << resets << " weight resets\n";
    }
}

struct EvalArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> scenarios;
    std::optional<std::size_t> repeats;
    std::string raw = "raw.csv";
    std::string summary = "summary.csv";
};

void cmd_eval(const EvalArgs& a)
{
    nlohmann::json j = nlohmann::json::object();
    if (!a.config.empty()) {
        auto in = open_input(a.config);
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw invalid_input("'" + a.config + "': " + e.what());
        }
    }
    if (a.seed) {
        j["seed"] = *a.seed;
    }
    if (a.threads) {
        j["threads"] = *a.threads;
    }
    if (a.scenarios) {
        j["scenarios"] = *a.scenarios;
    }
    if (a.repeats) {
        j["repeats"] = *a.repeats;
    }
    const auto cfg = experiment_config_from_json(j);
    const auto result = run_experiment(cfg);
    {
        Output raw(a.raw);
        write_raw_csv(*raw, result);
    }
    Output summary(a.summary);
    write_summary_csv(*summary, result);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiscale hierarchy of particle filters over trajectory corpora", "mhpf_cli"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic trajectory corpus (newline-delimited JSON)");
    g->add_option("--dataset", gen.dataset, "junction | fixed_endpoints | obstacles | density_walk | hand")
        ->capture_default_str();
    g->add_option("--count", gen.count, "Number of trajectories (0 = dataset default)")->capture_default_str();
    g->add_option("--points", gen.points, "Points per trajectory")->capture_default_str()->check(CLI::Range(2, 1000000));
    g->add_option("--grid", gen.grid, "Density raster for density_walk (ASCII or PGM)");
    g->add_option("--grid-out", gen.grid_out, "Write the generated density raster here");
    g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    g->add_option("-o,--out", gen.out, "Output file ('-' = stdout)")->capture_default_str();

    ClusterArgs cl;
    auto* c = app.add_subcommand("cluster", "Single-linkage Frechet clustering into a filtration tree");
    c->add_option("-i,--input", cl.input, "Trajectory file")->required();
    c->add_option("-o,--out", cl.out, "Tree JSON output ('-' = stdout)")->capture_default_str();
    c->add_option("--dendrogram", cl.dendrogram, "Text dendrogram output");
    c->add_option("--threads", cl.threads, "Worker threads for the distance matrix (0 = all cores)")
        ->capture_default_str();

    FilterArgs fa;
    auto* f = app.add_subcommand("filter", "Run the filter stack and stream per-step snapshots (NDJSON)");
    f->add_option("--corpus", fa.corpus, "Trajectory corpus")->required();
    f->add_option("--tree", fa.tree, "Tree JSON from 'cluster' (clusters the corpus when omitted)");
    f->add_option("--observations", fa.observations, "Observation stream (NDJSON)");
    f->add_option("--truth", fa.truth, "Ground-truth trajectory file; observations are generated from its first entry");
    f->add_option("--write-observations", fa.write_observations, "Save the generated observation stream");
    f->add_option("-n,--particles", fa.particles, "Particles per level")->capture_default_str()->check(CLI::PositiveNumber);
    f->add_option("--depletion", fa.depletion, "Fraction of particles whose class is randomized")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 0.999999));
    f->add_option("--resampling", fa.resampling, "multinomial | systematic")->capture_default_str();
    f->add_option("--kappa", fa.kappa, "Dynamics noise scale")->capture_default_str()->check(CLI::NonNegativeNumber);
    f->add_option("--epsilon-floor", fa.epsilon_floor, "Smallest neighbourhood radius (default: 2x mean step length)");
    f->add_option("--epsilon", fa.epsilon, "Neighbourhood radius for every class (overrides births)");
    f->add_option("--noise", fa.noise, "one_sided | centered")->capture_default_str();
    f->add_option("--psi", fa.psi, "Observation noise as a fraction of the corpus diagonal")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    f->add_option("--coarse-prob", fa.coarse_prob, "Probability that a step is observed coarsely")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    f->add_option("--coarse-level", fa.coarse_level, "Tree level of coarse observations");
    f->add_option("--coarse-samples", fa.coarse_samples, "Noisy samples per coarse classification")
        ->capture_default_str();
    f->add_option("--mode", fa.mode, "mixed_random | fine_lead_in_then_coarse")->capture_default_str();
    f->add_option("--lead-in", fa.lead_in, "Fine lead-in fraction for fine_lead_in_then_coarse")->capture_default_str();
    f->add_option("--seed", fa.seed, "Random seed")->capture_default_str();
    f->add_option("--threads", fa.threads, "Worker threads for clustering")->capture_default_str();
    f->add_option("-o,--out", fa.out, "Snapshot output ('-' = stdout)")->capture_default_str();

    EvalArgs ea;
    auto* e = app.add_subcommand("eval", "Run an experiment sweep and write raw and summary CSVs");
    e->add_option("--config", ea.config, "Experiment config (JSON)");
    e->add_option("--seed", ea.seed, "Override the config seed");
    e->add_option("--threads", ea.threads, "Override the worker count (0 = all cores)");
    e->add_option("--scenarios", ea.scenarios, "Override the scenario count");
    e->add_option("--repeats", ea.repeats, "Override the repeat count");
    e->add_option("--raw", ea.raw, "Per-step CSV output")->capture_default_str();
    e->add_option("--summary", ea.summary, "Per-cell summary CSV output")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (g->parsed()) {
            cmd_gen(gen);
        } else if (c->parsed()) {
            cmd_cluster(cl);
        } else if (f->parsed()) {
            cmd_filter(fa);
        } else if (e->parsed()) {
            cmd_eval(ea);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
