#pragma once

#include "deepesn/datasets.hpp"
#include "deepesn/random.hpp"
#include "deepesn/readout.hpp"
#include "deepesn/topology.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deepesn {

/// Half-open interval (lo, hi]; lo == hi denotes the single value lo.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct SearchSpace {
    Interval rho{0.1, 1.0};
    Interval omega_in{0.1, 2.0};
    Interval omega_il{0.1, 2.0};
    std::size_t configs_per_layer_count = 50;
    std::size_t guesses_per_config = 10;
    std::vector<std::size_t> layer_counts{1};

    void validate() const;

    static SearchSpace shallow();  ///< L = 1, full budget
    static SearchSpace deep();     ///< L = 2..5, full budget
    /// Same intervals and layer counts with a CI-sized budget (10 configs, 3 guesses).
    SearchSpace reduced() const;
};

/// Independent uniform draws of rho, omega_in and omega_il from their intervals.
ScalingSpec sample_config(const SearchSpace& space, RandomStream& rng);

struct TrialOptions {
    std::size_t total_units = 500;
    std::size_t interlayer_fan_in = 5;
    ReadoutOptions readout{};
};

struct TrialResult {
    std::string task;
    TopologyKind topology = Sparse{};
    std::size_t num_layers = 1;
    std::size_t config_index = 0;  ///< sample order within its layer count
    ScalingSpec hyper{};
    std::size_t guesses = 0;
    std::vector<double> validation_mse;  ///< per guess
    std::vector<double> test_mse;        ///< per guess
    double validation_mse_mean = 0.0;
    double validation_mse_std = 0.0;  ///< population standard deviation
    double test_mse_mean = 0.0;
    double test_mse_std = 0.0;
    bool failed = false;
    std::string failure;
};

/// Per-guess reservoir seed; a pure function of the trial identity.
std::uint64_t guess_seed(std::uint64_t master_seed, const TopologyKind& topology, std::size_t num_layers,
                         const ScalingSpec& hyper, std::size_t guess);

/// Mean and population standard deviation.
std::pair<double, double> mean_and_std(std::span<const double> values);

/// Builds `guesses` independent reservoirs, runs each once over the whole
/// series and scores two readouts per guess:
///  - validation: fit on [washout, train_len - validation_len), scored on the validation tail;
///  - test: fit on [washout, train_len), scored on the rest.
/// A trial with any non-finite guess is marked failed.
TrialResult evaluate_trial(const Dataset& task, const TopologyKind& topology, std::size_t num_layers,
                           const ScalingSpec& hyper, std::size_t guesses, std::uint64_t master_seed,
                           const TrialOptions& options = {});

/// Index of the trial with the lowest validation mean; ties go to fewer layers,
/// then to earlier samples. Failed trials are never selected.
std::optional<std::size_t> select_best(std::span<const TrialResult> trials);

struct ExecutionOptions {
    std::size_t workers = 1;
    /// When set, trials are executed in an order shuffled with this seed. Results do not depend on it.
    std::optional<std::uint64_t> shuffle_seed;
    /// Called after each trial completes; calls are serialized.
    std::function<void(const TrialResult&, std::size_t done, std::size_t total)> on_trial;
};

struct SearchResult {
    std::string task;
    TopologyKind topology = Sparse{};
    std::vector<TrialResult> trials;
    std::optional<std::size_t> selected;
    std::string error;

    const TrialResult* best() const { return selected ? &trials[*selected] : nullptr; }
};

/// Seed that scopes a search to one task.
std::uint64_t task_seed(std::uint64_t master_seed, std::string_view task_name);

/// Configurations sampled for one (task, topology, layer count); depends only on those and the seed.
std::vector<ScalingSpec> sample_configs(const SearchSpace& space, std::uint64_t master_seed, std::string_view task_name,
                                        const TopologyKind& topology, std::size_t num_layers);

/// Random search over every layer count in `space`, selected on validation MSE.
SearchResult run_search(const Dataset& task, const TopologyKind& topology, const SearchSpace& space,
                        std::uint64_t master_seed, const TrialOptions& trial_options = {},
                        const ExecutionOptions& execution = {});

struct TopologyOutcome {
    TopologyKind topology = Sparse{};
    std::optional<SearchResult> shallow;
    std::optional<SearchResult> deep;
};

struct TaskOutcome {
    std::string task;
    std::vector<TopologyOutcome> topologies;
    std::string error;  ///< non-empty when the task could not be evaluated
};

struct SuiteOptions {
    SearchSpace shallow = SearchSpace::shallow();
    SearchSpace deep = SearchSpace::deep();
    bool include_shallow = true;
    bool include_deep = true;
    TrialOptions trial{};
    ExecutionOptions execution{};

    static SuiteOptions full();
    static SuiteOptions reduced();
};

struct ExperimentReport {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<TaskOutcome> tasks;
    /// Tasks that were requested but not run (e.g. missing laser file), with the reason.
    std::vector<std::pair<std::string, std::string>> skipped;

    /// True when every requested task ran and every search selected a trial.
    bool complete() const;
};

ExperimentReport run_benchmark_suite(std::span<const Dataset> tasks, std::span<const TopologyKind> topologies,
                                     const SuiteOptions& options, std::uint64_t master_seed);

/// DeepESN-vs-ESN comparison for one task and topology.
struct OrderingCheck {
    std::string task;
    std::string topology;
    double shallow_test_mse = 0.0;
    double deep_test_mse = 0.0;
    std::size_t deep_layers = 0;
    bool deep_better() const { return deep_test_mse < shallow_test_mse; }
};

/// One entry per (task, topology) where both groups selected a trial.
std::vector<OrderingCheck> ordering_checks(const ExperimentReport& report);

}  // namespace deepesn
