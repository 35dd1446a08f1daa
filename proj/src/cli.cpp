#include "deepesn/cli.hpp"

#include "deepesn/datasets.hpp"
#include "deepesn/experiment.hpp"
#include "deepesn/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace deepesn::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GenerateArgs {
    std::string task;
    std::size_t length = kDefaultTaskLength;
    std::uint64_t seed = 42;
    std::string out = ".";
};

struct EvalArgs {
    std::string task = "narma10";
    std::string topology = "sparse";
    std::size_t layers = 1;
    double rho = 0.9;
    double omega_in = 1.0;
    double omega_il = 1.0;
    std::size_t guesses = 10;
    std::uint64_t seed = 42;
    std::size_t length = kDefaultTaskLength;
    std::size_t units = 500;
    std::string laser_file;
    std::string out = "results";
};

struct BenchmarkArgs {
    std::vector<std::string> tasks{"narma10", "mg17", "mg30", "laser"};
    std::vector<std::string> topologies{"sparse", "permutation", "ring", "chain"};
    std::string budget = "full";
    std::optional<std::size_t> configs;
    std::optional<std::size_t> guesses;
    std::vector<std::size_t> deep_layers{2, 3, 4, 5};
    bool shallow_only = false;
    bool deep_only = false;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::size_t length = kDefaultTaskLength;
    std::size_t units = 500;
    std::string laser_file;
    std::string out = "results";
    std::optional<std::uint64_t> shuffle_seed;
    bool quiet = false;
};

std::string laser_path(const std::string& flag)
{
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kLaserEnvVar)) return env;
    return {};
}

void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("failed writing " + path.string());
}

Dataset load_task(const std::string& name, std::size_t length, std::uint64_t seed, const std::string& laser_flag,
                  std::ostream& err)
{
    if (name == "laser") {
        const auto path = laser_path(laser_flag);
        if (path.empty())
            throw IoError(std::string("laser task needs a data file: pass --laser-file or set ") + kLaserEnvVar);
        return load_laser(path, err);
    }
    if (!is_generated_task(name)) throw UsageError("unknown task '" + name + "' (expected narma10, mg17, mg30 or laser)");
    return generate_task(name, length, seed);
}

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err)
{
    if (a.task == "laser") {
        err << "error: the laser series is loaded, not generated; use --laser-file <path> with eval or benchmark\n";
        return kUsageError;
    }
    if (!is_generated_task(a.task)) throw UsageError("unknown task '" + a.task + "' (expected narma10, mg17 or mg30)");
    const Dataset d = generate_task(a.task, a.length, a.seed);
    export_dataset(d, a.out, d.name);
    out << "wrote " << (fs::path(a.out) / (d.name + ".inputs.txt")).string() << ", "
        << (fs::path(a.out) / (d.name + ".targets.txt")).string() << " (" << d.size() << " steps)\n";
    return kSuccess;
}

void check_hyper(const char* flag, double v, double lo, double hi, std::ostream& err)
{
    if (!std::isfinite(v) || v <= 0.0)
        throw UsageError(std::string(flag) + " must be a finite value > 0, got " + std::to_string(v));
    if (v > hi || v <= lo)
        err << "warning: " << flag << "=" << v << " lies outside the search range (" << lo << ", " << hi << "]\n";
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err)
{
    const TopologyKind topology = parse_topology(a.topology);
    check_hyper("--rho", a.rho, 0.1, 1.0, err);
    check_hyper("--omega-in", a.omega_in, 0.1, 2.0, err);
    check_hyper("--omega-il", a.omega_il, 0.1, 2.0, err);
    if (a.units < a.layers) throw UsageError("--units must be at least --layers");

    const Dataset task = load_task(a.task, a.length, a.seed, a.laser_file, err);
    TrialOptions options;
    options.total_units = a.units;
    const ScalingSpec hyper{a.rho, a.omega_in, a.omega_il};
    const TrialResult r = evaluate_trial(task, topology, a.layers, hyper, a.guesses, task_seed(a.seed, task.name), options);

    std::ostringstream text;
    text << "task " << task.name << ", topology " << topology_name(topology) << ", layers " << a.layers << ", rho "
         << a.rho << ", omega_in " << a.omega_in << ", omega_il " << a.omega_il << ", guesses " << a.guesses
         << ", seed " << a.seed << '\n';
    text.precision(6);
    text << std::scientific;
    if (r.failed) {
        text << "trial failed: " << r.failure << '\n';
    } else {
        text << "validation MSE " << r.validation_mse_mean << " +- " << r.validation_mse_std << '\n';
        text << "test MSE       " << r.test_mse_mean << " +- " << r.test_mse_std << '\n';
    }
    out << text.str();

    ensure_directory(a.out);
    write_text(fs::path(a.out) / "eval.txt", text.str());
    ExperimentReport single;
    SearchResult search{task.name, topology, {r}, r.failed ? std::nullopt : std::optional<std::size_t>(0), r.failure};
    single.tasks.push_back(TaskOutcome{task.name, {TopologyOutcome{topology, std::nullopt, std::move(search)}}, {}});
    std::ofstream log(fs::path(a.out) / "eval_trial.csv");
    write_trial_log(single, log);
    return r.failed ? kRuntimeFailure : kSuccess;
}

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out, std::ostream& err)
{
    if (a.shallow_only && a.deep_only) throw UsageError("--shallow-only and --deep-only are exclusive");
    if (a.budget != "full" && a.budget != "reduced") throw UsageError("--budget must be 'full' or 'reduced'");

    std::vector<TopologyKind> topologies;
    for (const auto& name : a.topologies) topologies.push_back(parse_topology(name));
    for (const auto& name : a.tasks)
        if (name != "laser" && !is_generated_task(name)) throw UsageError("unknown task '" + name + "'");

    SuiteOptions options = a.budget == "full" ? SuiteOptions::full() : SuiteOptions::reduced();
    options.deep.layer_counts = a.deep_layers;
    for (auto* space : {&options.shallow, &options.deep}) {
        if (a.configs) space->configs_per_layer_count = *a.configs;
        if (a.guesses) space->guesses_per_config = *a.guesses;
    }
    options.include_shallow = !a.deep_only;
    options.include_deep = !a.shallow_only;
    options.trial.total_units = a.units;
    options.execution.workers = a.workers;
    options.execution.shuffle_seed = a.shuffle_seed;
    if (!a.quiet) {
        options.execution.on_trial = [&err](const TrialResult& t, std::size_t done, std::size_t total) {
            err << '[' << done << '/' << total << "] " << t.task << ' ' << topology_name(t.topology) << " L=" << t.num_layers
                << " config " << t.config_index << " val " << t.validation_mse_mean << '\n';
        };
    }

    std::vector<Dataset> datasets;
    std::vector<std::pair<std::string, std::string>> skipped;
    for (const auto& name : a.tasks) {
        try {
            datasets.push_back(load_task(name, a.length, a.seed, a.laser_file, err));
        } catch (const Error& e) {
            err << "warning: skipping task " << name << ": " << e.what() << '\n';
            skipped.emplace_back(name, e.what());
        }
    }

    ExperimentReport report = run_benchmark_suite(datasets, topologies, options, a.seed);
    report.metadata.emplace(report.metadata.begin() + 1, "budget", a.budget);
    report.skipped = std::move(skipped);

    ensure_directory(a.out);
    const auto text = format_report(report);
    write_text(fs::path(a.out) / "report.txt", text);
    std::ostringstream log;
    write_trial_log(report, log);
    write_text(fs::path(a.out) / "trial_log.csv", log.str());
    out << text;
    out << "\nwrote " << (fs::path(a.out) / "report.txt").string() << " and "
        << (fs::path(a.out) / "trial_log.csv").string() << '\n';
    return report.complete() ? kSuccess : kPartialCompletion;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deep echo state networks with structured reservoir topologies", "deepesn"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a generated task as one-value-per-line text files");
    generate->add_option("task", gen.task, "narma10, mg17 or mg30")->required();
    generate->add_option("--length", gen.length, "Number of time steps")->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed, "Random seed (NARMA10 inputs)");
    generate->add_option("--out", gen.out, "Output directory");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Score one hyperparameter configuration over several guesses");
    eval->add_option("--task", ev.task, "narma10, mg17, mg30 or laser");
    eval->add_option("--topology", ev.topology, "sparse, permutation, ring or chain");
    eval->add_option("--layers", ev.layers, "Number of reservoir layers")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
    eval->add_option("--rho", ev.rho, "Spectral radius (lambda for permutation, ring and chain)");
    eval->add_option("--omega-in", ev.omega_in, "Input scaling (2-norm of the input matrix)");
    eval->add_option("--omega-il", ev.omega_il, "Inter-layer scaling (2-norm of each inter-layer matrix)");
    eval->add_option("--guesses", ev.guesses, "Independent reservoirs to average")->check(CLI::PositiveNumber);
    eval->add_option("--seed", ev.seed, "Master seed");
    eval->add_option("--length", ev.length, "Generated series length")->check(CLI::PositiveNumber);
    eval->add_option("--units", ev.units, "Total reservoir units")->check(CLI::PositiveNumber);
    eval->add_option("--laser-file", ev.laser_file, std::string("Santa Fe laser data (default: $") + kLaserEnvVar + ")");
    eval->add_option("--out", ev.out, "Output directory");

    BenchmarkArgs bm;
    auto* bench = app.add_subcommand("benchmark", "Random search over shallow and deep reservoirs with a summary table");
    bench->add_option("--tasks", bm.tasks, "Comma-separated tasks")->delimiter(',');
    bench->add_option("--topologies", bm.topologies, "Comma-separated topologies")->delimiter(',');
    bench->add_option("--budget", bm.budget, "full (50 configs, 10 guesses) or reduced (10 configs, 3 guesses)");
    bench->add_option("--configs", bm.configs, "Override configurations per layer count")->check(CLI::PositiveNumber);
    bench->add_option("--guesses", bm.guesses, "Override guesses per configuration")->check(CLI::PositiveNumber);
    bench->add_option("--deep-layers", bm.deep_layers, "Layer counts of the deep search")
        ->delimiter(',')
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
    bench->add_flag("--shallow-only", bm.shallow_only, "Run only the single-layer search");
    bench->add_flag("--deep-only", bm.deep_only, "Run only the multi-layer search");
    bench->add_option("--seed", bm.seed, "Master seed");
    bench->add_option("--workers", bm.workers, "Concurrent trials")->check(CLI::PositiveNumber);
    bench->add_option("--length", bm.length, "Generated series length")->check(CLI::PositiveNumber);
    bench->add_option("--units", bm.units, "Total reservoir units")->check(CLI::PositiveNumber);
    bench->add_option("--laser-file", bm.laser_file, std::string("Santa Fe laser data (default: $") + kLaserEnvVar + ")");
    bench->add_option("--out", bm.out, "Output directory");
    bench->add_option("--shuffle-seed", bm.shuffle_seed, "Execute trials in a shuffled order (results are unchanged)")
        ->group("");
    bench->add_flag("--quiet", bm.quiet, "No per-trial progress lines");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen, out, err);
        if (eval->parsed()) return cmd_eval(ev, out, err);
        return cmd_benchmark(bm, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace deepesn::cli
