#pragma once

#include "deepesn/common.hpp"
#include "deepesn/reservoir.hpp"

#include <cstddef>

namespace deepesn {

/// Linear readout, N_Y x state width.
struct ReadoutWeights {
    RealMatrix matrix;
};

/// Post-washout states (rows = time steps) paired with targets.
struct RegressionProblem {
    RealMatrix states;   ///< T_eff x state width
    RealMatrix targets;  ///< T_eff x N_Y
};

struct ReadoutOptions {
    /// Singular values below rcond * sigma_max are treated as zero.
    double rcond = 1e-12;
    /// Tikhonov term; zero means plain pseudo-inversion.
    double ridge = 0.0;
};

/// Least-squares accumulator that keeps only the triangular factor of the
/// rows seen so far, so a fit can be extended with more rows without
/// refactoring the earlier ones.
///
/// For rows S = Q R, the pseudo-inverse solution S^+ Y equals R^+ (Q^T Y), and
/// S and R share their singular values, so the rcond cutoff is unchanged.
class LeastSquaresAccumulator {
public:
    LeastSquaresAccumulator(std::size_t state_width, std::size_t output_width);

    void append(const RealMatrix& states, const RealMatrix& targets);
    std::size_t rows_seen() const noexcept { return rows_seen_; }

    /// Minimum-norm least-squares readout over every row appended so far.
    ReadoutWeights solve(const ReadoutOptions& options = {}) const;

private:
    Eigen::Index width_;
    Eigen::Index outputs_;
    std::size_t rows_seen_ = 0;
    RealMatrix r_;    // k x width, upper trapezoidal
    RealMatrix qty_;  // k x outputs
};

/// W_out = (S^+ Y)^T with S^+ computed from the SVD.
ReadoutWeights train_pseudo_inverse(const RegressionProblem& problem, const ReadoutOptions& options = {});

/// Applies the readout to every state row. Returns rows x N_Y.
RealMatrix predict(const ReadoutWeights& weights, const RealMatrix& states);

/// Applies the readout to the trajectory rows after the first `washout` steps.
RealMatrix predict(const ReadoutWeights& weights, const StateTrajectory& trajectory, std::size_t washout);

/// Mean over steps and output components of the squared error.
double mse(const RealMatrix& predictions, const RealMatrix& targets);

}  // namespace deepesn
