#include "deepesn/datasets.hpp"

#include "deepesn/random.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace deepesn {

namespace {

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

Dataset next_step_task(std::string name, const std::vector<double>& series)
{
    Dataset d;
    d.name = std::move(name);
    d.inputs.assign(series.begin(), series.end() - 1);
    d.targets.assign(series.begin() + 1, series.end());
    return d;
}

}  // namespace

void Dataset::validate() const
{
    if (inputs.size() != targets.size()) throw InvalidArgument(name + ": inputs and targets differ in length");
    if (inputs.size() < train_len + 1)
        throw InvalidArgument(name + ": " + std::to_string(inputs.size()) + " steps is too short for a training split of " +
                              std::to_string(train_len));
    if (validation_len > train_len) throw InvalidArgument(name + ": validation split longer than training split");
    if (washout >= train_len - validation_len)
        throw InvalidArgument(name + ": washout leaves no rows to fit the readout");
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (!std::isfinite(inputs[i]) || !std::isfinite(targets[i]))
            throw InvalidArgument(name + ": non-finite value at step " + std::to_string(i + 1));
}

DatasetSplit split(const Dataset& dataset)
{
    if (dataset.inputs.size() != dataset.targets.size())
        throw InvalidArgument(dataset.name + ": inputs and targets differ in length");
    if (dataset.size() <= dataset.train_len)
        throw InvalidArgument(dataset.name + ": dataset of " + std::to_string(dataset.size()) +
                              " steps leaves no test data after a training split of " +
                              std::to_string(dataset.train_len));
    if (dataset.validation_len > dataset.train_len)
        throw InvalidArgument(dataset.name + ": validation split longer than training split");

    const std::size_t fit_end = dataset.train_len - dataset.validation_len;
    DatasetSplit s;
    s.fit = {0, fit_end};
    s.validation = {fit_end, dataset.train_len};
    s.train = {0, dataset.train_len};
    s.test = {dataset.train_len, dataset.size()};
    s.inputs = dataset.inputs;
    s.targets = dataset.targets;
    return s;
}

std::vector<double> narma10_targets(std::span<const double> inputs)
{
    const std::size_t n = inputs.size();
    std::vector<double> y(n, 0.0);
    auto u_at = [&](std::ptrdiff_t t) { return t < 0 ? 0.0 : inputs[static_cast<std::size_t>(t)]; };
    auto y_at = [&](std::ptrdiff_t t) { return t < 0 ? 0.0 : y[static_cast<std::size_t>(t)]; };
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n); ++t) {
        double sum = 0.0;
        for (std::ptrdiff_t i = 1; i <= 10; ++i) sum += y_at(t - i);
        y[static_cast<std::size_t>(t)] =
            0.3 * y_at(t - 1) + 0.05 * y_at(t - 1) * sum + 1.5 * u_at(t - 10) * u_at(t - 1) + 0.1;
    }
    return y;
}

Dataset generate_narma10(std::size_t length, std::uint64_t seed)
{
    if (length < 11) throw InvalidArgument("NARMA10 needs at least 11 steps, got " + std::to_string(length));
    RandomStream rng(seed);
    Dataset d;
    d.name = "narma10";
    d.inputs.resize(length);
    for (auto& u : d.inputs) u = rng.uniform(0.0, 0.5);
    d.targets = narma10_targets(d.inputs);
    for (std::size_t t = 0; t < length; ++t)
        if (!std::isfinite(d.targets[t]))
            throw GenerationError("NARMA10 recurrence diverged at step " + std::to_string(t + 1) + " for seed " +
                                  std::to_string(seed));
    d.metadata = {{"generator", "narma10"}, {"seed", std::to_string(seed)}, {"length", std::to_string(length)},
                  {"input_distribution", "uniform[0,0.5]"}};
    return d;
}

Dataset generate_narma10_stable(std::size_t length, std::uint64_t seed, int max_attempts)
{
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        try {
            auto d = generate_narma10(length, seed + static_cast<std::uint64_t>(attempt));
            if (attempt > 0) {
                std::clog << "warning: NARMA10 seed " << seed << " diverged; used seed "
                          << seed + static_cast<std::uint64_t>(attempt) << '\n';
                d.metadata.emplace_back("requested_seed", std::to_string(seed));
            }
            return d;
        } catch (const GenerationError&) {
        }
    }
    throw GenerationError("NARMA10 diverged for " + std::to_string(max_attempts) + " consecutive seeds from " +
                          std::to_string(seed));
}

void MGParams::validate() const
{
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("Mackey-Glass tau must be positive");
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("Mackey-Glass step must be positive");
    if (subsample < 1) throw InvalidArgument("Mackey-Glass subsample must be at least 1");
    if (!std::isfinite(initial_history)) throw InvalidArgument("Mackey-Glass history must be finite");
    const double ratio = tau / step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw InvalidArgument("Mackey-Glass tau must be an integer multiple of the step");
    if (std::round(ratio) < 2) throw InvalidArgument("Mackey-Glass delay must span at least two steps");
}

std::vector<double> mackey_glass_series(const MGParams& params, std::size_t count)
{
    params.validate();
    const auto delay = static_cast<std::size_t>(std::llround(params.tau / params.step));
    const double h = params.step;
    const std::size_t last_index = delay + (params.discard + count) * params.subsample;

    // u[k] holds the series at t = (k - delay) * h; indices 0..delay are the history.
    std::vector<double> u(last_index + 1, params.initial_history);
    auto delayed = [&](std::ptrdiff_t j) { return j < 0 ? params.initial_history : u[static_cast<std::size_t>(j)]; };
    auto rhs = [](double x, double x_tau) {
        const double p = x_tau * x_tau * x_tau * x_tau * x_tau;
        return 0.2 * x_tau / (1.0 + p * p) - 0.1 * x;
    };

    for (std::size_t k = delay; k < last_index; ++k) {
        const auto j = static_cast<std::ptrdiff_t>(k - delay);
        const double x = u[k];
        if (params.integrator == MgIntegrator::Euler) {
            u[k + 1] = x + h * rhs(x, delayed(j));
        } else {
            const double lag0 = delayed(j);
            const double lag1 = delayed(j + 1);
            // Cubic interpolation of the delayed value half a step ahead.
            const double lag_mid = (-delayed(j - 1) + 9.0 * lag0 + 9.0 * lag1 - delayed(j + 2)) / 16.0;
            const double k1 = rhs(x, lag0);
            const double k2 = rhs(x + 0.5 * h * k1, lag_mid);
            const double k3 = rhs(x + 0.5 * h * k2, lag_mid);
            const double k4 = rhs(x + h * k3, lag1);
            u[k + 1] = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!std::isfinite(u[k + 1]))
            throw GenerationError("Mackey-Glass integration diverged at t = " +
                                  std::to_string(static_cast<double>(k + 1 - delay) * h));
    }

    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = u[delay + (params.discard + i) * params.subsample];
    return out;
}

Dataset generate_mackey_glass(const MGParams& params, std::size_t length)
{
    if (length < 2) throw InvalidArgument("Mackey-Glass task needs at least 2 steps");
    auto series = mackey_glass_series(params, length + 1);
    for (auto& v : series) v = std::tanh(v - 1.0);

    const double rounded_tau = std::round(params.tau);
    const std::string name =
        rounded_tau == params.tau ? "mg" + std::to_string(static_cast<long long>(rounded_tau)) : "mg" + format_double(params.tau);
    Dataset d = next_step_task(name, series);
    d.metadata = {{"generator", "mackey_glass"},
                  {"tau", format_double(params.tau)},
                  {"step", format_double(params.step)},
                  {"subsample", std::to_string(params.subsample)},
                  {"initial_history", format_double(params.initial_history)},
                  {"discard", std::to_string(params.discard)},
                  {"integrator", params.integrator == MgIntegrator::Euler ? "euler" : "rk4"},
                  {"preprocessing", "tanh(u-1)"},
                  {"length", std::to_string(length)}};
    return d;
}

Dataset load_laser(const std::filesystem::path& path, std::ostream& log)
{
    auto raw = read_series(path);
    if (raw.size() < 2)
        throw IoError("laser file " + path.string() + " holds " + std::to_string(raw.size()) +
                      " samples; at least 2 are needed");
    if (raw.size() != kLaserExpectedSamples)
        log << "warning: laser file " << path.string() << " holds " << raw.size() << " samples, expected "
            << kLaserExpectedSamples << '\n';
    for (auto& v : raw) v *= 0.01;
    Dataset d = next_step_task("laser", raw);
    d.metadata = {{"source", path.string()}, {"samples", std::to_string(raw.size())}, {"scale", "0.01"}};
    return d;
}

Dataset load_laser(const std::filesystem::path& path) { return load_laser(path, std::clog); }

void write_series(const std::filesystem::path& path, std::span<const double> values)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (double v : values) out << format_double(v) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> read_series(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + std::string(text) + "'");
        values.push_back(v);
    }
    if (in.bad()) throw IoError("failed reading " + path.string());
    return values;
}

void export_dataset(const Dataset& dataset, const std::filesystem::path& directory, std::string_view stem)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
    const std::string base(stem);
    write_series(directory / (base + ".inputs.txt"), dataset.inputs);
    write_series(directory / (base + ".targets.txt"), dataset.targets);

    nlohmann::ordered_json meta;
    meta["task"] = dataset.name;
    meta["steps"] = dataset.size();
    meta["train_len"] = dataset.train_len;
    meta["washout"] = dataset.washout;
    meta["validation_len"] = dataset.validation_len;
    for (const auto& [key, value] : dataset.metadata) meta["generator"][key] = value;
    std::ofstream out(directory / (base + ".meta.json"));
    if (!out) throw IoError("cannot write metadata for " + base);
    out << meta.dump(2) << '\n';
}

bool is_generated_task(std::string_view name) { return name == "narma10" || name == "mg17" || name == "mg30"; }

Dataset generate_task(std::string_view name, std::size_t length, std::uint64_t seed)
{
    if (name == "narma10") return generate_narma10_stable(length, seed);
    if (name == "mg17" || name == "mg30") {
        MGParams p;
        p.tau = name == "mg17" ? 17.0 : 30.0;
        return generate_mackey_glass(p, length);
    }
    if (name == "laser")
        throw InvalidArgument("the laser task is loaded from a data file, not generated; pass --laser-file <path>");
    throw InvalidArgument("unknown task '" + std::string(name) + "' (expected narma10, mg17, mg30 or laser)");
}

}  // namespace deepesn
