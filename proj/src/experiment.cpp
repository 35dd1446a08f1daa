#include "deepesn/experiment.hpp"

#include "deepesn/reservoir.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

namespace deepesn {

namespace {

void validate_interval(const Interval& iv, const char* name)
{
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi || iv.hi <= 0.0)
        throw InvalidArgument(std::string("search interval for ") + name + " must be ordered, finite and positive");
}

// Runs fn(i) for i in [0, count) on `workers` threads. The visiting order may be
// shuffled; fn must write only to slot i.
template <typename Fn>
void parallel_indices(std::size_t count, const ExecutionOptions& exec, Fn&& fn)
{
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (exec.shuffle_seed) {
        RandomStream rng(*exec.shuffle_seed);
        for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
            try {
                fn(order[k]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(exec.workers, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
}

struct GuessScores {
    double validation = 0.0;
    double test = 0.0;
};

RealMatrix column_block(std::span<const double> series, IndexRange r)
{
    RealMatrix m(static_cast<Eigen::Index>(r.size()), 1);
    for (std::size_t i = 0; i < r.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = series[r.begin + i];
    return m;
}

RealMatrix state_block(const StateTrajectory& traj, IndexRange r)
{
    return traj.states.middleRows(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size()));
}

GuessScores evaluate_guess(const Dataset& task, const DatasetSplit& parts, const ReservoirSpec& spec,
                           const TrialOptions& options)
{
    const DeepReservoir reservoir = build_reservoir(spec);
    const StateTrajectory traj = run(reservoir, std::span<const double>(task.inputs));

    // The washout rows never enter a regression problem or a score.
    const IndexRange fit{task.washout, parts.fit.end};
    LeastSquaresAccumulator acc(traj.width(), 1);
    acc.append(state_block(traj, fit), column_block(task.targets, fit));
    const ReadoutWeights validation_readout = acc.solve(options.readout);
    GuessScores scores;
    scores.validation = mse(predict(validation_readout, state_block(traj, parts.validation)),
                            column_block(task.targets, parts.validation));

    // Extending the fit with the validation rows gives the readout on the whole training split.
    acc.append(state_block(traj, parts.validation), column_block(task.targets, parts.validation));
    const ReadoutWeights test_readout = acc.solve(options.readout);
    scores.test = mse(predict(test_readout, state_block(traj, parts.test)), column_block(task.targets, parts.test));
    return scores;
}

}  // namespace

void SearchSpace::validate() const
{
    validate_interval(rho, "rho");
    validate_interval(omega_in, "omega_in");
    validate_interval(omega_il, "omega_il");
    if (rho.lo < 0.0 || omega_in.lo < 0.0 || omega_il.lo < 0.0)
        throw InvalidArgument("search intervals must not include negative values");
    if (configs_per_layer_count < 1 || guesses_per_config < 1)
        throw InvalidArgument("search budget counts must be at least 1");
    if (layer_counts.empty()) throw InvalidArgument("search space needs at least one layer count");
    for (auto l : layer_counts)
        if (l < 1) throw InvalidArgument("layer counts must be at least 1");
}

SearchSpace SearchSpace::shallow() { return SearchSpace{}; }

SearchSpace SearchSpace::deep()
{
    SearchSpace s;
    s.layer_counts = {2, 3, 4, 5};
    return s;
}

SearchSpace SearchSpace::reduced() const
{
    SearchSpace s = *this;
    s.configs_per_layer_count = 10;
    s.guesses_per_config = 3;
    return s;
}

ScalingSpec sample_config(const SearchSpace& space, RandomStream& rng)
{
    ScalingSpec s;
    s.rho = rng.uniform_left_open(space.rho.lo, space.rho.hi);
    s.omega_in = rng.uniform_left_open(space.omega_in.lo, space.omega_in.hi);
    s.omega_il = rng.uniform_left_open(space.omega_il.lo, space.omega_il.hi);
    return s;
}

std::uint64_t guess_seed(std::uint64_t master_seed, const TopologyKind& topology, std::size_t num_layers,
                         const ScalingSpec& hyper, std::size_t guess)
{
    std::uint64_t config = hash_double(hyper.rho);
    config = hash_combine(config, hash_double(hyper.omega_in));
    config = hash_combine(config, hash_double(hyper.omega_il));
    std::uint64_t h = hash_combine(master_seed, topology_code(topology));
    h = hash_combine(h, num_layers);
    h = hash_combine(h, config);
    return hash_combine(h, guess);
}

std::pair<double, double> mean_and_std(std::span<const double> values)
{
    if (values.empty()) throw InvalidArgument("mean of an empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

TrialResult evaluate_trial(const Dataset& task, const TopologyKind& topology, std::size_t num_layers,
                           const ScalingSpec& hyper, std::size_t guesses, std::uint64_t master_seed,
                           const TrialOptions& options)
{
    if (guesses < 1) throw InvalidArgument("a trial needs at least one guess");
    if (num_layers < 1) throw InvalidArgument("number of layers must be at least 1");
    hyper.validate();
    task.validate();
    if (task.validation_len == 0) throw InvalidArgument(task.name + ": model selection needs a validation split");
    const DatasetSplit parts = split(task);

    TrialResult result;
    result.task = task.name;
    result.topology = topology;
    result.num_layers = num_layers;
    result.hyper = hyper;
    result.guesses = guesses;

    ReservoirSpec spec;
    spec.total_units = options.total_units;
    spec.num_layers = num_layers;
    spec.topology = topology;
    spec.scaling = hyper;
    spec.input_dim = 1;
    spec.interlayer_fan_in = options.interlayer_fan_in;
    spec.validate();

    for (std::size_t g = 0; g < guesses; ++g) {
        spec.seed = guess_seed(master_seed, topology, num_layers, hyper, g);
        GuessScores scores{std::nan(""), std::nan("")};
        try {
            scores = evaluate_guess(task, parts, spec, options);
        } catch (const Error& e) {
            // Degenerate draws, and non-finite states rejected by the readout.
            if (result.failure.empty()) result.failure = "guess " + std::to_string(g) + ": " + e.what();
        }
        result.validation_mse.push_back(scores.validation);
        result.test_mse.push_back(scores.test);
        if (!std::isfinite(scores.validation) || !std::isfinite(scores.test)) {
            result.failed = true;
            if (result.failure.empty()) result.failure = "guess " + std::to_string(g) + ": non-finite MSE";
        }
    }

    if (result.failed) {
        result.validation_mse_mean = result.validation_mse_std = std::nan("");
        result.test_mse_mean = result.test_mse_std = std::nan("");
    } else {
        std::tie(result.validation_mse_mean, result.validation_mse_std) = mean_and_std(result.validation_mse);
        std::tie(result.test_mse_mean, result.test_mse_std) = mean_and_std(result.test_mse);
    }
    return result;
}

std::optional<std::size_t> select_best(std::span<const TrialResult> trials)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        if (t.failed || !std::isfinite(t.validation_mse_mean)) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = trials[*best];
        const auto key = std::make_tuple(t.validation_mse_mean, t.num_layers, t.config_index);
        const auto best_key = std::make_tuple(b.validation_mse_mean, b.num_layers, b.config_index);
        if (key < best_key) best = i;
    }
    return best;
}

std::uint64_t task_seed(std::uint64_t master_seed, std::string_view task_name)
{
    return hash_combine(master_seed, hash_string(task_name));
}

std::vector<ScalingSpec> sample_configs(const SearchSpace& space, std::uint64_t master_seed, std::string_view task_name,
                                        const TopologyKind& topology, std::size_t num_layers)
{
    std::uint64_t key = hash_combine(task_seed(master_seed, task_name), hash_string("config"));
    key = hash_combine(key, topology_code(topology));
    RandomStream rng(hash_combine(key, num_layers));
    std::vector<ScalingSpec> configs;
    configs.reserve(space.configs_per_layer_count);
    for (std::size_t i = 0; i < space.configs_per_layer_count; ++i) configs.push_back(sample_config(space, rng));
    return configs;
}

namespace {

// A search whose trial slots are filled by the shared job pool.
struct PendingSearch {
    const Dataset* task;
    SearchResult result;
    std::size_t guesses;
};

struct Job {
    PendingSearch* search;
    std::size_t slot;
};

void prepare_search(PendingSearch& pending, const SearchSpace& space, std::uint64_t master_seed,
                    std::vector<Job>& jobs)
{
    auto& result = pending.result;
    for (auto layers : space.layer_counts) {
        const auto configs = sample_configs(space, master_seed, pending.task->name, result.topology, layers);
        for (std::size_t c = 0; c < configs.size(); ++c) {
            TrialResult placeholder;
            placeholder.task = pending.task->name;
            placeholder.topology = result.topology;
            placeholder.num_layers = layers;
            placeholder.config_index = c;
            placeholder.hyper = configs[c];
            result.trials.push_back(std::move(placeholder));
        }
    }
    for (std::size_t i = 0; i < result.trials.size(); ++i) jobs.push_back({&pending, i});
}

void execute_jobs(std::vector<Job>& jobs, std::uint64_t master_seed, const TrialOptions& trial_options,
                  const ExecutionOptions& execution)
{
    std::mutex progress_mutex;
    std::size_t done = 0;
    parallel_indices(jobs.size(), execution, [&](std::size_t j) {
        auto& job = jobs[j];
        auto& slot = job.search->result.trials[job.slot];
        const std::size_t config_index = slot.config_index;
        TrialResult r = evaluate_trial(*job.search->task, slot.topology, slot.num_layers, slot.hyper,
                                       job.search->guesses, task_seed(master_seed, job.search->task->name),
                                       trial_options);
        r.config_index = config_index;
        slot = std::move(r);
        if (execution.on_trial) {
            std::lock_guard lock(progress_mutex);
            execution.on_trial(slot, ++done, jobs.size());
        }
    });
}

void finish_search(SearchResult& result)
{
    result.selected = select_best(result.trials);
    if (!result.selected) result.error = "all trials failed";
}

}  // namespace

SearchResult run_search(const Dataset& task, const TopologyKind& topology, const SearchSpace& space,
                        std::uint64_t master_seed, const TrialOptions& trial_options, const ExecutionOptions& execution)
{
    space.validate();
    task.validate();
    PendingSearch pending{&task, SearchResult{}, space.guesses_per_config};
    pending.result.task = task.name;
    pending.result.topology = topology;
    std::vector<Job> jobs;
    prepare_search(pending, space, master_seed, jobs);
    execute_jobs(jobs, master_seed, trial_options, execution);
    finish_search(pending.result);
    if (pending.result.error.size()) throw Error(task.name + "/" + topology_name(topology) + ": all trials failed");
    return std::move(pending.result);
}

SuiteOptions SuiteOptions::full() { return SuiteOptions{}; }

SuiteOptions SuiteOptions::reduced()
{
    SuiteOptions o;
    o.shallow = o.shallow.reduced();
    o.deep = o.deep.reduced();
    return o;
}

bool ExperimentReport::complete() const
{
    if (!skipped.empty()) return false;
    for (const auto& task : tasks) {
        if (!task.error.empty()) return false;
        for (const auto& topo : task.topologies) {
            if (topo.shallow && !topo.shallow->selected) return false;
            if (topo.deep && !topo.deep->selected) return false;
        }
    }
    return true;
}

namespace {

std::string format_meta_double(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string join_layers(const std::vector<std::size_t>& layers)
{
    std::string s;
    for (std::size_t i = 0; i < layers.size(); ++i) s += (i ? "," : "") + std::to_string(layers[i]);
    return s;
}

std::string interval_text(const Interval& iv)
{
    return "(" + format_meta_double(iv.lo) + ", " + format_meta_double(iv.hi) + "]";
}

}  // namespace

ExperimentReport run_benchmark_suite(std::span<const Dataset> tasks, std::span<const TopologyKind> topologies,
                                     const SuiteOptions& options, std::uint64_t master_seed)
{
    if (!options.include_shallow && !options.include_deep)
        throw InvalidArgument("benchmark needs the shallow group, the deep group, or both");
    if (options.include_shallow) options.shallow.validate();
    if (options.include_deep) options.deep.validate();
    if (topologies.empty()) throw InvalidArgument("benchmark needs at least one topology");

    ExperimentReport report;
    auto& meta = report.metadata;
    meta.emplace_back("master_seed", std::to_string(master_seed));
    meta.emplace_back("total_units", std::to_string(options.trial.total_units));
    meta.emplace_back("interlayer_fan_in", std::to_string(options.trial.interlayer_fan_in));
    meta.emplace_back("readout", "pseudo-inverse via SVD");
    meta.emplace_back("rcond", format_meta_double(options.trial.readout.rcond));
    meta.emplace_back("ridge", format_meta_double(options.trial.readout.ridge));
    meta.emplace_back("std", "population");
    meta.emplace_back("selection", "min validation MSE mean; ties: fewer layers, earlier sample");
    auto describe = [&](const char* group, const SearchSpace& s) {
        const std::string g(group);
        meta.emplace_back(g + ".layers", join_layers(s.layer_counts));
        meta.emplace_back(g + ".configs_per_layer_count", std::to_string(s.configs_per_layer_count));
        meta.emplace_back(g + ".guesses_per_config", std::to_string(s.guesses_per_config));
        meta.emplace_back(g + ".rho", interval_text(s.rho));
        meta.emplace_back(g + ".omega_in", interval_text(s.omega_in));
        meta.emplace_back(g + ".omega_il", interval_text(s.omega_il));
    };
    if (options.include_shallow) describe("shallow", options.shallow);
    if (options.include_deep) describe("deep", options.deep);

    // Every search is laid out before any work starts, so trial identity (and
    // hence every seed) is independent of execution order.
    std::vector<std::unique_ptr<PendingSearch>> searches;
    std::vector<Job> jobs;
    report.tasks.reserve(tasks.size());
    struct Slots {
        PendingSearch* shallow = nullptr;
        PendingSearch* deep = nullptr;
    };
    std::vector<std::vector<Slots>> slots(tasks.size());

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Dataset& task = tasks[t];
        TaskOutcome outcome;
        outcome.task = task.name;
        try {
            task.validate();
            if (task.validation_len == 0) throw InvalidArgument(task.name + ": model selection needs a validation split");
        } catch (const Error& e) {
            outcome.error = e.what();
            report.tasks.push_back(std::move(outcome));
            continue;
        }
        for (const auto& [key, value] : task.metadata) meta.emplace_back("task." + task.name + "." + key, value);
        meta.emplace_back("task." + task.name + ".steps", std::to_string(task.size()));
        meta.emplace_back("task." + task.name + ".split",
                          "train " + std::to_string(task.train_len) + ", validation " +
                              std::to_string(task.validation_len) + ", washout " + std::to_string(task.washout));

        slots[t].resize(topologies.size());
        for (std::size_t k = 0; k < topologies.size(); ++k) {
            auto add = [&](const SearchSpace& space) {
                auto pending = std::make_unique<PendingSearch>(PendingSearch{&task, SearchResult{}, space.guesses_per_config});
                pending->result.task = task.name;
                pending->result.topology = topologies[k];
                prepare_search(*pending, space, master_seed, jobs);
                searches.push_back(std::move(pending));
                return searches.back().get();
            };
            if (options.include_shallow) slots[t][k].shallow = add(options.shallow);
            if (options.include_deep) slots[t][k].deep = add(options.deep);
        }
        report.tasks.push_back(std::move(outcome));
    }

    execute_jobs(jobs, master_seed, options.trial, options.execution);

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        auto& outcome = report.tasks[t];
        if (!outcome.error.empty()) continue;
        for (std::size_t k = 0; k < topologies.size(); ++k) {
            TopologyOutcome topo;
            topo.topology = topologies[k];
            if (auto* s = slots[t][k].shallow) {
                finish_search(s->result);
                topo.shallow = std::move(s->result);
            }
            if (auto* d = slots[t][k].deep) {
                finish_search(d->result);
                topo.deep = std::move(d->result);
            }
            outcome.topologies.push_back(std::move(topo));
        }
    }
    return report;
}

std::vector<OrderingCheck> ordering_checks(const ExperimentReport& report)
{
    std::vector<OrderingCheck> checks;
    for (const auto& task : report.tasks) {
        for (const auto& topo : task.topologies) {
            if (!topo.shallow || !topo.deep) continue;
            const auto* s = topo.shallow->best();
            const auto* d = topo.deep->best();
            if (!s || !d) continue;
            checks.push_back({task.task, topology_name(topo.topology), s->test_mse_mean, d->test_mse_mean, d->num_layers});
        }
    }
    return checks;
}

}  // namespace deepesn
