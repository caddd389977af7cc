#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <type_traits>
#include <vector>

#include "baseline.hpp"
#include "datasets.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "filter_stack.hpp"
#include "filtration.hpp"
#include "metrics.hpp"
#include "observations.hpp"

namespace mhpf {

enum class DatasetKind { junction, fixed_endpoints, obstacles, density_walk };
enum class FilterKind { mhpf, bl1, bl2 };

inline const char* name(FilterKind f)
{
    switch (f) {
    case FilterKind::mhpf:
        return "mhpf";
    case FilterKind::bl1:
        return "bl1";
    case FilterKind::bl2:
        return "bl2";
    }
    return "?";
}

inline FilterKind filter_kind(const std::string& s)
{
    if (s == "mhpf") {
        return FilterKind::mhpf;
    }
    if (s == "bl1") {
        return FilterKind::bl1;
    }
    if (s == "bl2") {
        return FilterKind::bl2;
    }
    throw invalid_input("unknown filter '" + s + "'");
}

/// A named observation protocol; psi is overridden by the sweep.
struct ObsVariant {
    std::string name = "fine";
    ObsConfig obs = fine_only();

    static ObsConfig fine_only()
    {
        ObsConfig c;
        c.coarse_prob = 0.0;
        return c;
    }
};

struct ExperimentConfig {
    DatasetKind dataset = DatasetKind::obstacles;
    std::size_t corpus_size = 0; // 0 picks the dataset's usual size
    std::size_t points = 100;    // points per trajectory, hence steps per trial
    std::size_t scenarios = 10;
    std::size_t repeats = 25;
    std::vector<double> kappas{0.3};
    std::vector<double> psis{0.01};
    std::vector<ObsVariant> variants{ObsVariant{}};
    FilterConfig filter;
    std::optional<double> epsilon_floor; // default: twice the mean step length of the corpus
    std::optional<double> global_epsilon;
    std::optional<double> coarse_level; // default_coarse_level of each scenario's tree
    NoiseMode dynamics_noise = NoiseMode::one_sided;
    double eval_level = 0.0;
    double convergence_fraction = 0.33;
    bool holdout = true;
    bool run_bl2 = true;
    bool check_invariants = false; // verify stack invariants after every MHPF step
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t junction_branches = 2;
    double junction_jitter = 0.3;
    WalkConfig walk;                  // starts default to the generated harbour's lane heads
    std::optional<DensityGrid> grid;  // density raster; generated when absent

    [[nodiscard]] std::size_t effective_corpus_size() const
    {
        if (corpus_size) {
            return corpus_size;
        }
        switch (dataset) {
        case DatasetKind::junction:
            return 14;
        case DatasetKind::fixed_endpoints:
            return 13;
        case DatasetKind::obstacles:
            return 33;
        case DatasetKind::density_walk:
            return 194;
        }
        return 0;
    }

    void validate() const
    {
        filter.validate();
        if (points < 2 || scenarios < 1 || repeats < 1) {
            throw invalid_input("experiment needs >= 2 points, >= 1 scenario and >= 1 repeat");
        }
        if (kappas.empty() || psis.empty() || variants.empty()) {
            throw invalid_input("experiment sweep lists must be non-empty");
        }
        for (double k : kappas) {
            if (!(k >= 0.0)) {
                throw invalid_input("kappa must be >= 0");
            }
        }
        for (const auto& v : variants) {
            v.obs.validate();
        }
        const std::size_t m = effective_corpus_size();
        if (scenarios > m || (holdout && m < 3)) {
            throw invalid_input("corpus too small for the requested scenarios");
        }
        if (!(convergence_fraction >= 0.0) || !(eval_level >= 0.0)) {
            throw invalid_input("convergence fraction and evaluation level must be >= 0");
        }
    }
};

inline std::vector<Trajectory> make_corpus(const ExperimentConfig& cfg, Rng rng)
{
    const std::size_t m = cfg.effective_corpus_size();
    switch (cfg.dataset) {
    case DatasetKind::junction: {
        const std::size_t per = (m + cfg.junction_branches - 1) / cfg.junction_branches;
        auto ts = gen_junction(cfg.junction_branches, per, cfg.junction_jitter, rng, cfg.points);
        ts.resize(m);
        return ts;
    }
    case DatasetKind::fixed_endpoints:
        return gen_fixed_endpoints(m, rng, cfg.points);
    case DatasetKind::obstacles:
        return gen_obstacle_world(m, rng, cfg.points);
    case DatasetKind::density_walk: {
        WalkConfig walk = cfg.walk;
        walk.n_trajectories = m;
        walk.n_points = cfg.points;
        DensityGrid grid;
        if (cfg.grid) {
            grid = *cfg.grid;
        } else {
            auto harbour = gen_harbour_grid(rng);
            grid = std::move(harbour.grid);
            if (walk.starts.empty()) {
                walk.starts = std::move(harbour.starts);
            }
        }
        return walk_from_density(grid, walk, rng);
    }
    }
    throw invalid_input("unknown dataset kind");
}

/// Everything about one ground-truth scenario that does not depend on the repeat.
struct Scenario {
    std::size_t truth_index = 0;
    Trajectory truth;
    std::vector<Trajectory> corpus;
    std::shared_ptr<const ClusterTree> tree;
    NodeId true_leaf{};
    double scale = 1.0;
    double coarse_level = 0.0;
    double epsilon_floor = 1.0;
    std::shared_ptr<const CoarseObserver> observer;
    std::vector<std::shared_ptr<const DynamicsSet>> dynamics; // per kappa
    std::vector<std::pair<std::shared_ptr<const ClusterTree>, std::shared_ptr<const DynamicsSet>>> collapsed;
};

inline double mean_step_length(std::span<const Trajectory> ts)
{
    double total = 0.0;
    std::size_t steps = 0;
    for (const auto& t : ts) {
        total += arc_length(t);
        steps += t.size() - 1;
    }
    return steps ? total / static_cast<double>(steps) : 0.0;
}

inline Scenario prepare_scenario(const std::vector<Trajectory>& full, std::size_t truth_index,
                                 const ExperimentConfig& cfg)
{
    Scenario s;
    s.truth_index = truth_index;
    s.truth = full.at(truth_index);
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (!cfg.holdout || i != truth_index) {
            s.corpus.push_back(full[i]);
        }
    }
    s.tree = std::make_shared<const ClusterTree>(cluster_trajectories(s.corpus, 1));
    if (cfg.holdout) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.corpus.size(); ++i) {
            const double d = frechet_distance(s.truth, s.corpus[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        s.true_leaf = node_id(best);
    } else {
        s.true_leaf = node_id(truth_index);
    }
    s.scale = bounding_diagonal(s.corpus);
    s.coarse_level = cfg.coarse_level ? *cfg.coarse_level : default_coarse_level(*s.tree);
    s.epsilon_floor = cfg.epsilon_floor ? *cfg.epsilon_floor : 2.0 * mean_step_length(s.corpus);
    s.observer = std::make_shared<const CoarseObserver>(s.tree, s.corpus, s.coarse_level);
    for (double kappa : cfg.kappas) {
        DynamicsConfig dc{kappa, s.epsilon_floor, cfg.global_epsilon, cfg.dynamics_noise};
        auto dyn = std::make_shared<const DynamicsSet>(build_dynamics(*s.tree, s.corpus, dc));
        s.collapsed.push_back(collapse_to_root(*s.tree, *dyn));
        s.dynamics.push_back(std::move(dyn));
    }
    return s;
}

/// Uniform leaf prior; each class starts at its trajectory point nearest to `anchor`.
inline Prior nearest_point_prior(std::span<const Trajectory> corpus, const Point& anchor)
{
    Prior prior;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& pts = corpus[i].points;
        const auto it = std::min_element(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
            return squared_distance(a.coords(), anchor.coords()) < squared_distance(b.coords(), anchor.coords());
        });
        prior.push_back(ClassPrior{node_id(i), 1.0, *it});
    }
    return prior;
}

struct CellInfo {
    std::size_t index = 0;
    double kappa = 0.0;
    std::size_t kappa_index = 0;
    double psi = 0.0;
    std::size_t variant_index = 0;
    std::string variant;
};

struct RawRecord {
    std::size_t cell = 0;
    std::size_t scenario = 0;
    std::size_t repeat = 0;
    FilterKind filter = FilterKind::mhpf;
    std::size_t step = 0;
    double mse = 0.0;
    double map_distance = 0.0;
    double root_birth = 0.0;
};

/// Per-step metrics of one filter on one observation stream.
struct ScenarioResult {
    FilterKind filter = FilterKind::mhpf;
    std::vector<double> mse;
    std::vector<double> map_distance;
    std::optional<std::size_t> convergence;
    double root_birth = 0.0;
    std::size_t extrapolated_steps = 0;
    std::size_t weight_resets = 0;
    InvariantReport invariants; // worst case over all steps (MHPF with check_invariants only)
};

/// A ground truth, its observation stream, and the filter seed shared by all filters.
struct Trial {
    const Scenario* scenario = nullptr;
    std::size_t kappa_index = 0;
    std::vector<std::vector<Observation>> stream;
    Rng filter_rng{0};
    bool check_invariants = false;

    /// Position of the first fine observation, or the truth's start when there is none.
    [[nodiscard]] Point anchor() const
    {
        for (const auto& o : stream.front()) {
            if (const auto* f = std::get_if<FineObservation>(&o)) {
                return f->position;
            }
        }
        return scenario->truth.points.front();
    }
};

namespace detail {

template <class Filter, class MapDistance>
ScenarioResult track(Filter& filter, FilterKind kind, const Trial& trial, MapDistance map_distance,
                     double convergence_fraction)
{
    const Scenario& s = *trial.scenario;
    ScenarioResult r;
    r.filter = kind;
    r.root_birth = s.tree->birth(s.tree->root());
    auto record = [&](std::size_t t) {
        r.mse.push_back(mse(filter.point_estimate(), s.truth.points[t]));
        r.map_distance.push_back(map_distance());
    };
    record(0);
    for (std::size_t t = 1; t < trial.stream.size(); ++t) {
        const auto diag = filter.step(trial.stream[t]);
        r.extrapolated_steps += diag.extrapolated_steps;
        r.weight_resets += diag.weight_reset ? 1 : 0;
        if constexpr (std::is_same_v<Filter, FilterStack>) {
            if (trial.check_invariants) {
                const auto inv = check_invariants(filter);
                r.invariants.level_sum_error = std::max(r.invariants.level_sum_error, inv.level_sum_error);
                r.invariants.parent_error = std::max(r.invariants.parent_error, inv.parent_error);
                r.invariants.counts_ok = r.invariants.counts_ok && inv.counts_ok;
            }
        }
        record(t);
    }
    r.convergence = convergence_time(r.map_distance, r.root_birth, convergence_fraction);
    return r;
}

} // namespace detail

inline ScenarioResult run_mhpf(const Trial& trial, const ExperimentConfig& cfg)
{
    const Scenario& s = *trial.scenario;
    FilterStack stack(s.tree, s.dynamics.at(trial.kappa_index), nearest_point_prior(s.corpus, trial.anchor()),
                      cfg.filter, trial.filter_rng);
    return detail::track(
        stack, FilterKind::mhpf, trial,
        [&] { return map_tree_distance(stack, s.true_leaf, cfg.eval_level); }, cfg.convergence_fraction);
}

/// Leaf-class particle filter without hierarchy; coarse observations are ignored.
inline ScenarioResult run_bl1(const Trial& trial, const ExperimentConfig& cfg)
{
    const Scenario& s = *trial.scenario;
    std::vector<NodeId> leaves;
    for (std::size_t i = 0; i < s.tree->leaf_count(); ++i) {
        leaves.push_back(node_id(i));
    }
    BasicParticleFilter bl1(s.dynamics.at(trial.kappa_index), leaves, nearest_point_prior(s.corpus, trial.anchor()),
                            cfg.filter, trial.filter_rng);
    return detail::track(
        bl1, FilterKind::bl1, trial,
        [&] { return map_tree_distance(*s.tree, bl1.map_class(), s.true_leaf, cfg.eval_level); },
        cfg.convergence_fraction);
}

/// Single-class filter on the root's dynamics; its MAP class is always the root.
inline ScenarioResult run_bl2(const Trial& trial, const ExperimentConfig& cfg)
{
    const Scenario& s = *trial.scenario;
    const auto& [ctree, cdyn] = s.collapsed.at(trial.kappa_index);
    const Point anchor = trial.anchor();
    const auto per_leaf = nearest_point_prior(s.corpus, anchor);
    const auto start = std::min_element(per_leaf.begin(), per_leaf.end(), [&](const ClassPrior& a, const ClassPrior& b) {
        return squared_distance(a.position.coords(), anchor.coords()) <
               squared_distance(b.position.coords(), anchor.coords());
    });
    BasicParticleFilter bl2(cdyn, {node_id(0)}, Prior{ClassPrior{node_id(0), 1.0, start->position}}, cfg.filter,
                            trial.filter_rng);
    const double dist = map_tree_distance(*s.tree, s.tree->root(), s.true_leaf, cfg.eval_level);
    return detail::track(bl2, FilterKind::bl2, trial, [dist] { return dist; }, cfg.convergence_fraction);
}

struct TrialOutput {
    std::vector<RawRecord> records;
    InvariantReport invariants;
};

/// Runs all filters for one (scenario, cell, repeat) and returns their per-step records.
inline TrialOutput run_trial(const Scenario& s, const CellInfo& cell, const ObsConfig& obs_cfg,
                             std::size_t scenario_index, std::size_t repeat, const ExperimentConfig& cfg)
{
    const Rng base = Rng(cfg.seed).split(0x100 + cell.index).split(scenario_index).split(repeat);
    ObsConfig oc = obs_cfg;
    oc.psi = cell.psi;
    Trial trial{&s, cell.kappa_index, generate_stream(s.truth.points, oc, *s.observer, s.scale, base.split(1)),
                base.split(2), cfg.check_invariants};

    std::vector<ScenarioResult> results{run_mhpf(trial, cfg), run_bl1(trial, cfg)};
    if (cfg.run_bl2) {
        results.push_back(run_bl2(trial, cfg));
    }
    TrialOutput out;
    out.invariants = results.front().invariants;
    for (const auto& r : results) {
        for (std::size_t t = 0; t < r.mse.size(); ++t) {
            out.records.push_back(
                RawRecord{cell.index, scenario_index, repeat, r.filter, t, r.mse[t], r.map_distance[t], r.root_birth});
        }
    }
    return out;
}


struct RunSummary {
    std::size_t cell = 0;
    std::size_t scenario = 0;
    std::size_t repeat = 0;
    FilterKind filter = FilterKind::mhpf;
    double mean_mse = 0.0;
    double mean_map = 0.0;
    double final_quarter_map = 0.0;
    double convergence = 0.0; // trial length when it never converges
    bool converged = false;
};

struct MetricStats {
    double mean = 0.0;
    double sd = 0.0;
};

struct CellSummary {
    std::size_t cell = 0;
    FilterKind filter = FilterKind::mhpf;
    MetricStats mse, map, final_map, convergence;
    double converged_fraction = 0.0;
    // rank-sum p-values against bl1 over per-scenario means (1 for bl1 itself)
    double p_mse = 1.0, p_final_map = 1.0, p_convergence = 1.0;
};

struct ExperimentResult {
    std::vector<CellInfo> cells;
    std::vector<RawRecord> raw;
    std::vector<RunSummary> runs;
    std::vector<CellSummary> summary;
    InvariantReport invariants; // worst case over all MHPF trials when checked
};

inline std::vector<RunSummary> summarize_runs(const std::vector<RawRecord>& raw, double convergence_fraction)
{
    std::map<std::tuple<std::size_t, std::size_t, std::size_t, int>, std::vector<const RawRecord*>> groups;
    for (const auto& r : raw) {
        groups[{r.cell, r.scenario, r.repeat, static_cast<int>(r.filter)}].push_back(&r);
    }
    std::vector<RunSummary> out;
    for (auto& [key, rows] : groups) {
        std::sort(rows.begin(), rows.end(), [](const RawRecord* a, const RawRecord* b) { return a->step < b->step; });
        std::vector<double> mses, maps;
        for (const auto* r : rows) {
            mses.push_back(r->mse);
            maps.push_back(r->map_distance);
        }
        RunSummary s;
        std::tie(s.cell, s.scenario, s.repeat) = std::tuple{std::get<0>(key), std::get<1>(key), std::get<2>(key)};
        s.filter = static_cast<FilterKind>(std::get<3>(key));
        s.mean_mse = mean(mses);
        s.mean_map = mean(maps);
        const std::size_t q = maps.size() - maps.size() / 4;
        s.final_quarter_map = mean(std::span<const double>(maps).subspan(std::min(q, maps.size() - 1)));
        const auto conv = convergence_time(maps, rows.front()->root_birth, convergence_fraction);
        s.converged = conv.has_value();
        s.convergence = conv ? static_cast<double>(*conv) : static_cast<double>(maps.size());
        out.push_back(s);
    }
    return out;
}

/// Per-scenario means (averaged over repeats) of one metric for one filter in one cell.
inline std::vector<double> scenario_means(const std::vector<RunSummary>& runs, std::size_t cell, FilterKind filter,
                                          double RunSummary::*metric)
{
    std::map<std::size_t, std::vector<double>> by_scenario;
    for (const auto& r : runs) {
        if (r.cell == cell && r.filter == filter) {
            by_scenario[r.scenario].push_back(r.*metric);
        }
    }
    std::vector<double> out;
    for (const auto& [s, values] : by_scenario) {
        out.push_back(mean(values));
    }
    return out;
}

inline std::vector<CellSummary> summarize_cells(const std::vector<RunSummary>& runs, std::size_t n_cells)
{
    std::vector<CellSummary> out;
    for (std::size_t c = 0; c < n_cells; ++c) {
        for (FilterKind f : {FilterKind::mhpf, FilterKind::bl1, FilterKind::bl2}) {
            const auto mses = scenario_means(runs, c, f, &RunSummary::mean_mse);
            if (mses.empty()) {
                continue;
            }
            auto stats = [](const std::vector<double>& xs) { return MetricStats{mean(xs), stddev(xs)}; };
            const auto maps = scenario_means(runs, c, f, &RunSummary::mean_map);
            const auto finals = scenario_means(runs, c, f, &RunSummary::final_quarter_map);
            const auto convs = scenario_means(runs, c, f, &RunSummary::convergence);
            CellSummary s;
            s.cell = c;
            s.filter = f;
            s.mse = stats(mses);
            s.map = stats(maps);
            s.final_map = stats(finals);
            s.convergence = stats(convs);
            std::size_t converged = 0, total = 0;
            for (const auto& r : runs) {
                if (r.cell == c && r.filter == f) {
                    converged += r.converged ? 1 : 0;
                    ++total;
                }
            }
            s.converged_fraction = total ? static_cast<double>(converged) / static_cast<double>(total) : 0.0;
            if (f != FilterKind::bl1) {
                s.p_mse = rank_sum_p_value(mses, scenario_means(runs, c, FilterKind::bl1, &RunSummary::mean_mse));
                s.p_final_map =
                    rank_sum_p_value(finals, scenario_means(runs, c, FilterKind::bl1, &RunSummary::final_quarter_map));
                s.p_convergence =
                    rank_sum_p_value(convs, scenario_means(runs, c, FilterKind::bl1, &RunSummary::convergence));
            }
            out.push_back(s);
        }
    }
    return out;
}

/**
 * Runs the full sweep: kappa x psi x observation variant cells, each over
 * `scenarios` held-out ground truths and `repeats` seeded repetitions.
 * Trials are distributed over cfg.threads workers; results do not depend on
 * the worker count.
 */
inline ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const Rng root(cfg.seed);
    const auto full = make_corpus(cfg, root.split(0x10));

    std::vector<std::size_t> order(full.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng pick = root.split(0x20);
    for (std::size_t i = 0; i < cfg.scenarios; ++i) {
        std::swap(order[i], order[i + pick.index(order.size() - i)]);
    }

    ExperimentResult result;
    for (std::size_t k = 0; k < cfg.kappas.size(); ++k) {
        for (double psi : cfg.psis) {
            for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
                result.cells.push_back(
                    CellInfo{result.cells.size(), cfg.kappas[k], k, psi, v, cfg.variants[v].name});
            }
        }
    }

    std::vector<Scenario> scenarios(cfg.scenarios);
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> jobs;
    for (std::size_t s = 0; s < cfg.scenarios; ++s) {
        for (const auto& cell : result.cells) {
            for (std::size_t r = 0; r < cfg.repeats; ++r) {
                jobs.emplace_back(s, cell.index, r);
            }
        }
    }
    std::vector<TrialOutput> outputs(jobs.size());
    const unsigned workers = std::max(1U, std::min<unsigned>(cfg.threads ? cfg.threads : std::thread::hardware_concurrency(),
                                                            static_cast<unsigned>(jobs.size())));
    auto run_pool = [workers](std::size_t n, auto&& body) {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        };
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 1; w < workers; ++w) {
                pool.emplace_back(worker);
            }
            worker();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    };
    run_pool(cfg.scenarios, [&](std::size_t s) { scenarios[s] = prepare_scenario(full, order[s], cfg); });
    run_pool(jobs.size(), [&](std::size_t i) {
        const auto [s, c, r] = jobs[i];
        const auto& cell = result.cells[c];
        outputs[i] = run_trial(scenarios[s], cell, cfg.variants[cell.variant_index].obs, s, r, cfg);
    });
    for (auto& o : outputs) {
        result.raw.insert(result.raw.end(), o.records.begin(), o.records.end());
        result.invariants.level_sum_error = std::max(result.invariants.level_sum_error, o.invariants.level_sum_error);
        result.invariants.parent_error = std::max(result.invariants.parent_error, o.invariants.parent_error);
        result.invariants.counts_ok = result.invariants.counts_ok && o.invariants.counts_ok;
    }
    result.runs = summarize_runs(result.raw, cfg.convergence_fraction);
    result.summary = summarize_cells(result.runs, result.cells.size());
    return result;
}

/// Per-scenario means pooled over every cell.
inline std::vector<double> pooled_scenario_means(const ExperimentResult& r, FilterKind f, double RunSummary::*metric)
{
    std::vector<double> out;
    for (const auto& cell : r.cells) {
        const auto xs = scenario_means(r.runs, cell.index, f, metric);
        out.insert(out.end(), xs.begin(), xs.end());
    }
    return out;
}

// CSV output

inline constexpr const char* raw_csv_header = "cell,kappa,psi,variant,scenario,repeat,filter,step,mse,map_distance,root_birth";
inline constexpr const char* summary_csv_header =
    "cell,kappa,psi,variant,filter,mse_mean,mse_sd,map_mean,map_sd,final_map_mean,final_map_sd,"
    "convergence_mean,convergence_sd,converged_fraction,p_mse_vs_bl1,p_final_map_vs_bl1,p_convergence_vs_bl1";

inline std::string format_double(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_raw_csv(std::ostream& out, const ExperimentResult& r)
{
    out << raw_csv_header << '\n';
    for (const auto& rec : r.raw) {
        const auto& c = r.cells.at(rec.cell);
        out << rec.cell << ',' << format_double(c.kappa) << ',' << format_double(c.psi) << ',' << c.variant << ','
            << rec.scenario << ',' << rec.repeat << ',' << name(rec.filter) << ',' << rec.step << ','
            << format_double(rec.mse) << ',' << format_double(rec.map_distance) << ','
            << format_double(rec.root_birth) << '\n';
    }
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& r)
{
    out << summary_csv_header << '\n';
    for (const auto& s : r.summary) {
        const auto& c = r.cells.at(s.cell);
        out << s.cell << ',' << format_double(c.kappa) << ',' << format_double(c.psi) << ',' << c.variant << ','
            << name(s.filter) << ',' << format_double(s.mse.mean) << ',' << format_double(s.mse.sd) << ','
            << format_double(s.map.mean) << ',' << format_double(s.map.sd) << ',' << format_double(s.final_map.mean)
            << ',' << format_double(s.final_map.sd) << ',' << format_double(s.convergence.mean) << ','
            << format_double(s.convergence.sd) << ',' << format_double(s.converged_fraction) << ','
            << format_double(s.p_mse) << ',' << format_double(s.p_final_map) << ','
            << format_double(s.p_convergence) << '\n';
    }
}

/// Parses a raw CSV written by write_raw_csv back into records and cells.
inline ExperimentResult read_raw_csv(std::istream& in)
{
    ExperimentResult r;
    std::string line;
    if (!std::getline(in, line) || line != raw_csv_header) {
        throw invalid_input("raw CSV header mismatch");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            f.push_back(field);
        }
        if (f.size() != 11) {
            throw invalid_input("raw CSV row has " + std::to_string(f.size()) + " fields");
        }
        RawRecord rec;
        rec.cell = std::stoul(f[0]);
        rec.scenario = std::stoul(f[4]);
        rec.repeat = std::stoul(f[5]);
        rec.filter = filter_kind(f[6]);
        rec.step = std::stoul(f[7]);
        rec.mse = std::stod(f[8]);
        rec.map_distance = std::stod(f[9]);
        rec.root_birth = std::stod(f[10]);
        if (r.cells.size() <= rec.cell) {
            r.cells.resize(rec.cell + 1);
        }
        r.cells[rec.cell] = CellInfo{rec.cell, std::stod(f[1]), 0, std::stod(f[2]), 0, f[3]};
        r.raw.push_back(rec);
    }
    return r;
}

} // namespace mhpf
