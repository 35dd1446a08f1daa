#include "deepesn/experiment.hpp"
#include "deepesn/readout.hpp"
#include "deepesn/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace deepesn;

namespace {

// Small task so a trial runs in milliseconds.
Dataset small_task(std::uint64_t seed = 1, std::size_t length = 1600)
{
    Dataset d = generate_narma10(length, seed);
    d.train_len = 1000;
    d.washout = 50;
    d.validation_len = 300;
    return d;
}

TrialOptions small_options()
{
    TrialOptions o;
    o.total_units = 40;
    return o;
}

SearchSpace tiny_space(std::vector<std::size_t> layers)
{
    SearchSpace s;
    s.configs_per_layer_count = 3;
    s.guesses_per_config = 2;
    s.layer_counts = std::move(layers);
    return s;
}

std::string log_of(const ExperimentReport& r)
{
    std::ostringstream out;
    write_trial_log(r, out);
    return out.str();
}

TrialResult synthetic(std::size_t layers, std::size_t index, double val, bool failed = false)
{
    TrialResult t;
    t.num_layers = layers;
    t.config_index = index;
    t.validation_mse_mean = val;
    t.failed = failed;
    return t;
}

// Readout trained on [a, b) rows of the trajectory, scored on [c, d).
double direct_score(const StateTrajectory& traj, const std::vector<double>& targets, std::size_t a, std::size_t b,
                    std::size_t c, std::size_t d)
{
    auto rows = [&](std::size_t lo, std::size_t hi) {
        RealMatrix y(static_cast<Eigen::Index>(hi - lo), 1);
        for (std::size_t i = lo; i < hi; ++i) y(static_cast<Eigen::Index>(i - lo), 0) = targets[i];
        return y;
    };
    const auto n = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
    const auto w = train_pseudo_inverse({traj.states.middleRows(n(a), n(b - a)), rows(a, b)});
    return mse(predict(w, RealMatrix(traj.states.middleRows(n(c), n(d - c)))), rows(c, d));
}

}  // namespace

TEST(SampleConfig, DegenerateIntervalsReturnTheirValue)
{
    SearchSpace s;
    s.rho = {0.5, 0.5};
    s.omega_in = {1.0, 1.0};
    s.omega_il = {1.0, 1.0};
    RandomStream rng(3);
    for (int i = 0; i < 10; ++i) {
        const auto c = sample_config(s, rng);
        EXPECT_EQ(c.rho, 0.5);
        EXPECT_EQ(c.omega_in, 1.0);
        EXPECT_EQ(c.omega_il, 1.0);
    }
}

TEST(SampleConfig, UniformOverHalfOpenInterval)
{
    SearchSpace s;
    RandomStream rng(11);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto c = sample_config(s, rng);
        EXPECT_GT(c.rho, 0.1);
        EXPECT_LE(c.rho, 1.0);
        EXPECT_GT(c.omega_in, 0.1);
        EXPECT_LE(c.omega_in, 2.0);
        EXPECT_GT(c.omega_il, 0.1);
        EXPECT_LE(c.omega_il, 2.0);
        sum += c.rho;
    }
    EXPECT_NEAR(sum / n, 0.55, 0.02);
}

TEST(SampleConfig, Deterministic)
{
    const auto a = sample_configs(SearchSpace::shallow(), 42, "narma10", Sparse{}, 1);
    const auto b = sample_configs(SearchSpace::shallow(), 42, "narma10", Sparse{}, 1);
    const auto c = sample_configs(SearchSpace::shallow(), 43, "narma10", Sparse{}, 1);
    ASSERT_EQ(a.size(), 50u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].rho, b[i].rho);
        EXPECT_EQ(a[i].omega_in, b[i].omega_in);
    }
    EXPECT_NE(a[0].rho, c[0].rho);
}

TEST(SearchSpace, InvalidSpaces)
{
    SearchSpace s;
    s.rho = {1.0, 0.5};
    EXPECT_THROW(s.validate(), InvalidArgument);
    s = SearchSpace{};
    s.rho = {-0.5, 1.0};
    EXPECT_THROW(s.validate(), InvalidArgument);
    s = SearchSpace{};
    s.layer_counts = {};
    EXPECT_THROW(s.validate(), InvalidArgument);
    s = SearchSpace{};
    s.guesses_per_config = 0;
    EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(MeanAndStd, Population)
{
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto [m, sd] = mean_and_std(v);
    EXPECT_DOUBLE_EQ(m, 2.5);
    EXPECT_DOUBLE_EQ(sd, std::sqrt(1.25));
    const std::vector<double> one{7.0};
    EXPECT_EQ(mean_and_std(one).second, 0.0);
}

TEST(EvaluateTrial, SingleGuessHasZeroStd)
{
    const auto t = evaluate_trial(small_task(), Sparse{}, 1, ScalingSpec{}, 1, 42, small_options());
    ASSERT_FALSE(t.failed) << t.failure;
    EXPECT_EQ(t.validation_mse_std, 0.0);
    EXPECT_EQ(t.test_mse_std, 0.0);
    EXPECT_EQ(t.validation_mse_mean, t.validation_mse[0]);
}

TEST(EvaluateTrial, DeterministicAndAggregatesMatchPerGuess)
{
    const auto task = small_task();
    const ScalingSpec hyper{0.8, 0.5, 1.2};
    const auto a = evaluate_trial(task, Permutation{}, 2, hyper, 4, 7, small_options());
    const auto b = evaluate_trial(task, Permutation{}, 2, hyper, 4, 7, small_options());
    ASSERT_FALSE(a.failed) << a.failure;
    EXPECT_EQ(a.validation_mse, b.validation_mse);
    EXPECT_EQ(a.test_mse, b.test_mse);
    ASSERT_EQ(a.test_mse.size(), 4u);
    // mean of squares minus square of mean equals the population variance
    const double n = 4.0;
    const double sum = std::accumulate(a.test_mse.begin(), a.test_mse.end(), 0.0);
    double sq = 0.0;
    for (double v : a.test_mse) sq += v * v;
    const double mean = sum / n;
    EXPECT_NEAR(a.test_mse_mean, mean, 1e-15 * mean);
    EXPECT_NEAR(a.test_mse_std, std::sqrt(std::max(0.0, sq / n - mean * mean)), 1e-6 * a.test_mse_std + 1e-18);
}

TEST(EvaluateTrial, MatchesDirectPipeline)
{
    const auto task = small_task(2);
    const ScalingSpec hyper{0.9, 1.0, 1.0};
    const auto opts = small_options();
    const auto t = evaluate_trial(task, Ring{}, 2, hyper, 2, 5, opts);
    ASSERT_FALSE(t.failed) << t.failure;
    for (std::size_t g = 0; g < 2; ++g) {
        ReservoirSpec spec;
        spec.total_units = opts.total_units;
        spec.num_layers = 2;
        spec.topology = Ring{};
        spec.scaling = hyper;
        spec.seed = guess_seed(5, Ring{}, 2, hyper, g);
        const auto traj = run(build_reservoir(spec), std::span<const double>(task.inputs));
        // washout 50, fit to 700, validation to 1000, test to 1600
        const double val = direct_score(traj, task.targets, 50, 700, 700, 1000);
        const double test = direct_score(traj, task.targets, 50, 1000, 1000, 1600);
        EXPECT_NEAR(t.validation_mse[g], val, 1e-8 * val);
        EXPECT_NEAR(t.test_mse[g], test, 1e-8 * test);
    }
}

TEST(EvaluateTrial, WashoutRowsDoNotEnterTheFit)
{
    auto task = small_task(3);
    const auto clean = evaluate_trial(task, Sparse{}, 1, ScalingSpec{}, 1, 9, small_options());
    for (std::size_t i = 0; i < task.washout; ++i) task.targets[i] = 1e6;
    const auto dirty = evaluate_trial(task, Sparse{}, 1, ScalingSpec{}, 1, 9, small_options());
    EXPECT_EQ(clean.validation_mse, dirty.validation_mse);
    EXPECT_EQ(clean.test_mse, dirty.test_mse);
}

TEST(EvaluateTrial, TestMseScalesQuadraticallyWithTargets)
{
    auto task = small_task(4);
    const auto base = evaluate_trial(task, Chain{}, 1, ScalingSpec{}, 1, 3, small_options());
    for (double& y : task.targets) y *= 10.0;
    const auto scaled = evaluate_trial(task, Chain{}, 1, ScalingSpec{}, 1, 3, small_options());
    EXPECT_NEAR(scaled.test_mse[0], 100.0 * base.test_mse[0], 1e-6 * scaled.test_mse[0]);
    EXPECT_NEAR(scaled.validation_mse[0], 100.0 * base.validation_mse[0], 1e-6 * scaled.validation_mse[0]);
}

TEST(EvaluateTrial, Errors)
{
    const auto task = small_task();
    EXPECT_THROW(evaluate_trial(task, Sparse{}, 1, ScalingSpec{}, 0, 1, small_options()), InvalidArgument);
    EXPECT_THROW(evaluate_trial(task, Sparse{}, 0, ScalingSpec{}, 1, 1, small_options()), InvalidArgument);
    ScalingSpec bad;
    bad.rho = -1.0;
    EXPECT_THROW(evaluate_trial(task, Sparse{}, 1, bad, 1, 1, small_options()), InvalidArgument);
    auto no_val = task;
    no_val.validation_len = 0;
    EXPECT_THROW(evaluate_trial(no_val, Sparse{}, 1, ScalingSpec{}, 1, 1, small_options()), InvalidArgument);
}

TEST(SelectBest, MinimumValidationMean)
{
    const std::vector<TrialResult> trials{synthetic(1, 0, 3e-4), synthetic(1, 1, 1e-4), synthetic(2, 0, 2e-4)};
    EXPECT_EQ(select_best(trials), 1u);
}

TEST(SelectBest, TiesPreferFewerLayersThenEarlierSamples)
{
    const std::vector<TrialResult> trials{synthetic(3, 0, 1e-4), synthetic(2, 4, 1e-4), synthetic(2, 1, 1e-4),
                                          synthetic(4, 0, 5e-4)};
    EXPECT_EQ(select_best(trials), 2u);
}

TEST(SelectBest, SkipsFailedTrials)
{
    const std::vector<TrialResult> trials{synthetic(1, 0, std::nan(""), true), synthetic(1, 1, 2e-4),
                                          synthetic(1, 2, 1e-9, true)};
    EXPECT_EQ(select_best(trials), 1u);
    const std::vector<TrialResult> none{synthetic(1, 0, std::nan(""), true)};
    EXPECT_FALSE(select_best(none).has_value());
}

TEST(RunSearch, SelectsMinimumAndCoversEveryLayerCount)
{
    const auto r = run_search(small_task(), Sparse{}, tiny_space({1, 2}), 42, small_options());
    ASSERT_EQ(r.trials.size(), 6u);
    ASSERT_TRUE(r.selected);
    for (const auto& t : r.trials) EXPECT_GE(t.validation_mse_mean, r.best()->validation_mse_mean);
    EXPECT_EQ(r.trials[0].num_layers, 1u);
    EXPECT_EQ(r.trials[5].num_layers, 2u);
    EXPECT_EQ(r.trials[4].config_index, 1u);
}

TEST(RunSearch, SingleLayerTrialsAgreeAcrossSpaces)
{
    const auto task = small_task();
    const auto shallow = run_search(task, Permutation{}, tiny_space({1}), 42, small_options());
    const auto mixed = run_search(task, Permutation{}, tiny_space({1, 2}), 42, small_options());
    for (std::size_t i = 0; i < shallow.trials.size(); ++i) {
        EXPECT_EQ(shallow.trials[i].hyper.rho, mixed.trials[i].hyper.rho);
        EXPECT_EQ(shallow.trials[i].validation_mse, mixed.trials[i].validation_mse);
        EXPECT_EQ(shallow.trials[i].test_mse, mixed.trials[i].test_mse);
    }
}

TEST(Suite, StructureAndOrderingChecks)
{
    const std::vector<Dataset> tasks{small_task(1)};
    const std::vector<TopologyKind> topologies{Sparse{}, Chain{}};
    SuiteOptions o;
    o.shallow = tiny_space({1});
    o.deep = tiny_space({2, 3});
    o.trial = small_options();
    const auto report = run_benchmark_suite(tasks, topologies, o, 42);
    ASSERT_EQ(report.tasks.size(), 1u);
    ASSERT_EQ(report.tasks[0].topologies.size(), 2u);
    for (const auto& topo : report.tasks[0].topologies) {
        ASSERT_TRUE(topo.shallow && topo.deep);
        EXPECT_EQ(topo.shallow->trials.size(), 3u);
        EXPECT_EQ(topo.deep->trials.size(), 6u);
        EXPECT_GE(topo.deep->best()->num_layers, 2u);
    }
    EXPECT_TRUE(report.complete());
    const auto checks = ordering_checks(report);
    ASSERT_EQ(checks.size(), 2u);
    EXPECT_EQ(checks[0].topology, "sparse");
    EXPECT_EQ(checks[1].topology, "chain");
    EXPECT_FALSE(report.metadata.empty());
}

TEST(Suite, ShuffledParallelRunIsIdentical)
{
    const std::vector<Dataset> tasks{small_task(1), small_task(2)};
    const std::vector<TopologyKind> topologies{Sparse{}, Ring{}};
    SuiteOptions o;
    o.shallow = tiny_space({1});
    o.deep = tiny_space({2});
    o.trial = small_options();
    const auto serial = log_of(run_benchmark_suite(tasks, topologies, o, 42));
    o.execution.workers = 3;
    o.execution.shuffle_seed = 99;
    std::size_t calls = 0;
    o.execution.on_trial = [&](const TrialResult&, std::size_t, std::size_t) { ++calls; };
    const auto shuffled = log_of(run_benchmark_suite(tasks, topologies, o, 42));
    EXPECT_EQ(serial, shuffled);
    EXPECT_EQ(calls, 2u * 2u * 6u);
}

TEST(TaskSeed, DependsOnTaskName)
{
    EXPECT_NE(task_seed(42, "narma10"), task_seed(42, "mg17"));
    EXPECT_EQ(task_seed(42, "mg17"), task_seed(42, "mg17"));
    EXPECT_NE(task_seed(42, "mg17"), task_seed(43, "mg17"));
}
