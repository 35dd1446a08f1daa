#pragma once

#include "deepesn/common.hpp"
#include "deepesn/random.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace deepesn {

/// Each unit receives `fan_in` incoming weights from randomly chosen units.
struct Sparse {
    std::size_t fan_in = 5;
    bool operator==(const Sparse&) const = default;
};
/// lambda * P for a random permutation matrix P.
struct Permutation {
    bool operator==(const Permutation&) const = default;
};
/// A single cycle through all units.
struct Ring {
    bool operator==(const Ring&) const = default;
};
/// Delay line: unit i feeds unit i+1 only.
struct Chain {
    bool operator==(const Chain&) const = default;
};

using TopologyKind = std::variant<Sparse, Permutation, Ring, Chain>;

/// "sparse", "permutation", "ring" or "chain"; "sparse:<k>" for a non-default fan-in.
std::string topology_name(const TopologyKind& kind);

/// Accepts the names above; "sparse:<k>" selects a fan-in other than 5.
TopologyKind parse_topology(std::string_view text);

/// Stable numeric identity used for seed derivation.
std::uint64_t topology_code(const TopologyKind& kind);

/// Scaling hyperparameters shared by all layers of a reservoir.
struct ScalingSpec {
    double rho = 0.9;       ///< spectral radius (or lambda for permutation/ring/chain)
    double omega_in = 1.0;  ///< target 2-norm of the input matrix
    double omega_il = 1.0;  ///< target 2-norm of every inter-layer matrix

    /// Throws InvalidArgument unless all three values are finite and positive.
    void validate() const;
    bool operator==(const ScalingSpec&) const = default;
};

// Recurrent matrices. All returned matrices are n x n.

RealMatrix make_sparse_recurrent(std::size_t n, std::size_t fan_in, double rho, RandomStream& rng);
RealMatrix make_permutation_recurrent(std::size_t n, double lambda, RandomStream& rng);
RealMatrix make_ring_recurrent(std::size_t n, double lambda);
RealMatrix make_chain_recurrent(std::size_t n, double lambda);

/// lambda * P where column j of P is the unit vector e_{targets[j]}.
/// `targets` must be a permutation of 0..n-1.
RealMatrix make_permutation_matrix(std::span<const std::size_t> targets, double lambda);

/// Dispatches on `kind`; `rho` plays the role of lambda for the structured kinds.
RealMatrix make_recurrent(const TopologyKind& kind, std::size_t n, double rho, RandomStream& rng);

/// Dense n_r x n_u matrix, uniform [-1,1] entries rescaled to 2-norm omega_in.
RealMatrix make_input_matrix(std::size_t n_r, std::size_t n_u, double omega_in, RandomStream& rng);

/// n_to x n_from matrix with exactly fan_in non-zeros per row, rescaled to 2-norm omega_il.
RealMatrix make_interlayer_matrix(std::size_t n_to, std::size_t n_from, std::size_t fan_in,
                                  double omega_il, RandomStream& rng);

/// Largest eigenvalue modulus. Power iteration with a dense eigensolver fallback.
double spectral_radius(const RealMatrix& m);

/// Largest singular value, via power iteration on m^T m.
double operator_norm(const RealMatrix& m);

}  // namespace deepesn
