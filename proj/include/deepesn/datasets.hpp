#pragma once

#include "deepesn/common.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace deepesn {

/// Scalar prediction task: inputs u(t) paired with targets y(t), plus split sizes.
struct Dataset {
    std::string name;
    std::vector<double> inputs;
    std::vector<double> targets;
    std::size_t train_len = 5000;
    std::size_t washout = 100;
    std::size_t validation_len = 1000;
    /// Generator parameters, written to the metadata sidecar and report header.
    std::vector<std::pair<std::string, std::string>> metadata;

    std::size_t size() const noexcept { return inputs.size(); }
    /// Throws InvalidArgument when the invariants do not hold.
    void validate() const;
};

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return begin == end; }
    bool operator==(const IndexRange&) const = default;
};

struct DatasetSplit {
    IndexRange fit;         ///< training rows that exclude the validation tail
    IndexRange validation;  ///< last validation_len steps of the training split
    IndexRange train;       ///< the whole training split (fit + validation)
    IndexRange test;        ///< everything after the training split
    std::span<const double> inputs;
    std::span<const double> targets;

    std::span<const double> inputs_in(IndexRange r) const { return inputs.subspan(r.begin, r.size()); }
    std::span<const double> targets_in(IndexRange r) const { return targets.subspan(r.begin, r.size()); }
};

/// Split boundaries. Washout is not removed here; the experiment drops it.
DatasetSplit split(const Dataset& dataset);

// NARMA10 ---------------------------------------------------------------------

/// Evaluates the tenth-order NARMA recurrence for the given inputs, with
/// u(t) = y(t) = 0 before the first step.
std::vector<double> narma10_targets(std::span<const double> inputs);

/// Inputs i.i.d. uniform on [0, 0.5]. Throws GenerationError if the recurrence diverges.
Dataset generate_narma10(std::size_t length, std::uint64_t seed);

/// Retries with seed+1, seed+2, ... when a draw diverges; the seed actually
/// used is recorded in the dataset metadata.
Dataset generate_narma10_stable(std::size_t length, std::uint64_t seed, int max_attempts = 100);

// Mackey-Glass ----------------------------------------------------------------

enum class MgIntegrator { Euler, RungeKutta4 };

struct MGParams {
    double tau = 17.0;
    /// Integration step; tau must be an integer multiple of it.
    double step = 0.01;
    /// Integration steps per emitted sample.
    std::size_t subsample = 100;
    /// Constant value of the series for t <= 0.
    double initial_history = 1.2;
    /// Emitted samples dropped as generator transient.
    std::size_t discard = 1000;
    MgIntegrator integrator = MgIntegrator::RungeKutta4;

    void validate() const;
};

/// `count` raw samples after the transient, no preprocessing.
std::vector<double> mackey_glass_series(const MGParams& params, std::size_t count);

/// Next-step prediction on tanh(u - 1). `length` is the number of steps
/// (input/target pairs); length + 1 raw samples are generated.
Dataset generate_mackey_glass(const MGParams& params, std::size_t length);

// Santa Fe laser --------------------------------------------------------------

inline constexpr std::size_t kLaserExpectedSamples = 10092;

/// Loads one intensity per line, scales by 0.01 and builds the next-step task.
/// Other sample counts than 10092 produce a warning on `log`.
Dataset load_laser(const std::filesystem::path& path, std::ostream& log);
Dataset load_laser(const std::filesystem::path& path);

// Plain-text series -----------------------------------------------------------

/// One value per line, round-trip precision.
void write_series(const std::filesystem::path& path, std::span<const double> values);

/// Reads one value per line; blank lines are skipped. Errors name the line.
std::vector<double> read_series(const std::filesystem::path& path);

/// Writes <stem>.inputs.txt, <stem>.targets.txt and <stem>.meta.json into `directory`.
void export_dataset(const Dataset& dataset, const std::filesystem::path& directory, std::string_view stem);

// Task registry ---------------------------------------------------------------

inline constexpr std::size_t kDefaultTaskLength = 10000;

/// Known generated task names: narma10, mg17, mg30.
bool is_generated_task(std::string_view name);

/// Builds a generated task; "laser" is rejected because it has to be loaded.
Dataset generate_task(std::string_view name, std::size_t length, std::uint64_t seed);

}  // namespace deepesn
