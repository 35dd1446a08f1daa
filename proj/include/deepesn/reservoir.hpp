#pragma once

#include "deepesn/common.hpp"
#include "deepesn/topology.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace deepesn {

struct ReservoirSpec {
    std::size_t total_units = 500;
    std::size_t num_layers = 1;
    TopologyKind topology = Sparse{};
    ScalingSpec scaling{};
    std::size_t input_dim = 1;
    /// Incoming connections per unit from the previous layer.
    std::size_t interlayer_fan_in = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Splits `total` units over `layers` as evenly as possible; earlier layers take the remainder.
std::vector<std::size_t> split_units(std::size_t total, std::size_t layers);

struct LayerWeights {
    RealMatrix recurrent;               ///< square, layer_size x layer_size
    std::optional<RealMatrix> inbound;  ///< layer_size x previous layer size; absent for layer 0
};

/// Immutable stack of reservoir layers.
class DeepReservoir {
public:
    DeepReservoir(RealMatrix input_weights, std::vector<LayerWeights> layers);

    const RealMatrix& input_weights() const noexcept { return input_weights_; }
    const std::vector<LayerWeights>& layers() const noexcept { return layers_; }
    const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    std::size_t num_layers() const noexcept { return layers_.size(); }
    std::size_t total_units() const noexcept { return total_; }
    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(input_weights_.cols()); }

private:
    friend class StateRunner;

    RealMatrix input_weights_;
    std::vector<LayerWeights> layers_;
    std::vector<std::size_t> sizes_;
    std::size_t total_ = 0;
    // Sparse copies for the state update; the dense matrices stay authoritative.
    std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> recurrent_sparse_;
    std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> inbound_sparse_;
};

/// Global reservoir states, one row per time step.
struct StateTrajectory {
    RealMatrix states;                       ///< steps x total_units
    std::vector<std::size_t> layer_offsets;  ///< column where each layer starts
    std::vector<std::size_t> layer_sizes;

    std::size_t steps() const noexcept { return static_cast<std::size_t>(states.rows()); }
    std::size_t width() const noexcept { return static_cast<std::size_t>(states.cols()); }
    /// States of one layer, steps x layer_size.
    RealMatrix layer(std::size_t index) const;
};

DeepReservoir build_reservoir(const ReservoirSpec& spec);

/// Drives the reservoir from the null state. `inputs` is steps x input_dim.
StateTrajectory run(const DeepReservoir& reservoir, const RealMatrix& inputs);

/// Scalar-input convenience overload.
StateTrajectory run(const DeepReservoir& reservoir, std::span<const double> inputs);

namespace test_hooks {

/// Same recurrence as run(), but starting from `initial_state` (length total_units)
/// instead of zero. Used to check contraction of trajectories.
StateTrajectory run_from_state(const DeepReservoir& reservoir, const RealMatrix& inputs,
                               const RealVector& initial_state);

}  // namespace test_hooks

}  // namespace deepesn
