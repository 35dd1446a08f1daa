#include "deepesn/reservoir.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace deepesn {

void ReservoirSpec::validate() const
{
    if (num_layers < 1) throw InvalidArgument("number of layers must be at least 1");
    if (total_units < num_layers)
        throw InvalidArgument("total units (" + std::to_string(total_units) + ") must be at least the number of layers (" +
                              std::to_string(num_layers) + ")");
    if (input_dim < 1) throw InvalidArgument("input dimension must be at least 1");
    scaling.validate();
}

std::vector<std::size_t> split_units(std::size_t total, std::size_t layers)
{
    if (layers < 1 || total < layers) throw InvalidArgument("cannot split " + std::to_string(total) + " units over " +
                                                            std::to_string(layers) + " layers");
    std::vector<std::size_t> sizes(layers, total / layers);
    for (std::size_t i = 0; i < total % layers; ++i) ++sizes[i];
    return sizes;
}

DeepReservoir::DeepReservoir(RealMatrix input_weights, std::vector<LayerWeights> layers)
    : input_weights_(std::move(input_weights)), layers_(std::move(layers))
{
    if (layers_.empty()) throw InvalidArgument("a reservoir needs at least one layer");
    if (!input_weights_.allFinite()) throw InvalidArgument("input weights contain non-finite entries");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        const auto n = layer.recurrent.rows();
        if (n < 1 || layer.recurrent.cols() != n)
            throw InvalidArgument("layer " + std::to_string(l) + " recurrent matrix must be square");
        if (!layer.recurrent.allFinite())
            throw InvalidArgument("layer " + std::to_string(l) + " recurrent matrix has non-finite entries");
        if (l == 0) {
            if (layer.inbound) throw InvalidArgument("the first layer takes no inter-layer matrix");
            if (input_weights_.rows() != n) throw InvalidArgument("input weights rows must match first layer size");
        } else {
            if (!layer.inbound) throw InvalidArgument("layer " + std::to_string(l) + " is missing its inter-layer matrix");
            if (layer.inbound->rows() != n || layer.inbound->cols() != static_cast<Eigen::Index>(sizes_.back()))
                throw InvalidArgument("layer " + std::to_string(l) + " inter-layer matrix has the wrong shape");
            if (!layer.inbound->allFinite())
                throw InvalidArgument("layer " + std::to_string(l) + " inter-layer matrix has non-finite entries");
            inbound_sparse_.push_back(layer.inbound->sparseView());
        }
        recurrent_sparse_.push_back(layer.recurrent.sparseView());
        sizes_.push_back(static_cast<std::size_t>(n));
        total_ += static_cast<std::size_t>(n);
    }
}

RealMatrix StateTrajectory::layer(std::size_t index) const
{
    if (index >= layer_sizes.size()) throw InvalidArgument("layer index out of range");
    return states.middleCols(static_cast<Eigen::Index>(layer_offsets[index]),
                             static_cast<Eigen::Index>(layer_sizes[index]));
}

DeepReservoir build_reservoir(const ReservoirSpec& spec)
{
    spec.validate();
    const auto sizes = split_units(spec.total_units, spec.num_layers);
    const RandomStream base(spec.seed);

    auto input_rng = base.derive(0);
    RealMatrix w_in = make_input_matrix(sizes[0], spec.input_dim, spec.scaling.omega_in, input_rng);

    std::vector<LayerWeights> layers;
    layers.reserve(sizes.size());
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        auto recurrent_rng = base.derive(2 * l + 1);
        LayerWeights layer{make_recurrent(spec.topology, sizes[l], spec.scaling.rho, recurrent_rng), std::nullopt};
        if (l > 0) {
            auto inbound_rng = base.derive(2 * l + 2);
            layer.inbound = make_interlayer_matrix(sizes[l], sizes[l - 1], spec.interlayer_fan_in,
                                                   spec.scaling.omega_il, inbound_rng);
        }
        layers.push_back(std::move(layer));
    }
    return DeepReservoir(std::move(w_in), std::move(layers));
}

class StateRunner {
public:
    static StateTrajectory run(const DeepReservoir& r, const RealMatrix& inputs, const RealVector* initial)
    {
        if (inputs.cols() != r.input_weights_.cols())
            throw InvalidArgument("input width " + std::to_string(inputs.cols()) + " does not match reservoir input dim " +
                                  std::to_string(r.input_weights_.cols()));
        if (!inputs.allFinite()) throw InvalidArgument("inputs contain non-finite values");

        const std::size_t layers = r.layers_.size();
        StateTrajectory out;
        out.layer_sizes = r.sizes_;
        out.layer_offsets.resize(layers);
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layers; ++l) {
            out.layer_offsets[l] = offset;
            offset += r.sizes_[l];
        }

        std::vector<RealVector> state(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            const auto n = static_cast<Eigen::Index>(r.sizes_[l]);
            state[l] = initial ? RealVector(initial->segment(static_cast<Eigen::Index>(out.layer_offsets[l]), n))
                               : RealVector(RealVector::Zero(n));
        }

        const Eigen::Index steps = inputs.rows();
        out.states.resize(steps, static_cast<Eigen::Index>(r.total_));
        RealVector pre;
        for (Eigen::Index t = 0; t < steps; ++t) {
            // Layers update in ascending order: layer l reads layer l-1 at the current step.
            for (std::size_t l = 0; l < layers; ++l) {
                if (l == 0)
                    pre = r.input_weights_ * inputs.row(t).transpose();
                else
                    pre = r.inbound_sparse_[l - 1] * state[l - 1];
                pre += r.recurrent_sparse_[l] * state[l];
                state[l] = pre.array().tanh();
                out.states.row(t).segment(static_cast<Eigen::Index>(out.layer_offsets[l]), state[l].size()) =
                    state[l].transpose();
            }
        }
        return out;
    }
};

StateTrajectory run(const DeepReservoir& reservoir, const RealMatrix& inputs)
{
    return StateRunner::run(reservoir, inputs, nullptr);
}

StateTrajectory run(const DeepReservoir& reservoir, std::span<const double> inputs)
{
    const RealMatrix column = Eigen::Map<const RealVector>(inputs.data(), static_cast<Eigen::Index>(inputs.size()));
    return StateRunner::run(reservoir, column, nullptr);
}

namespace test_hooks {

StateTrajectory run_from_state(const DeepReservoir& reservoir, const RealMatrix& inputs, const RealVector& initial_state)
{
    if (initial_state.size() != static_cast<Eigen::Index>(reservoir.total_units()))
        throw InvalidArgument("initial state length must equal total units");
    return StateRunner::run(reservoir, inputs, &initial_state);
}

}  // namespace test_hooks

}  // namespace deepesn
