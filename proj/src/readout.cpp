#include "deepesn/readout.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <string>

namespace deepesn {

LeastSquaresAccumulator::LeastSquaresAccumulator(std::size_t state_width, std::size_t output_width)
    : width_(static_cast<Eigen::Index>(state_width)), outputs_(static_cast<Eigen::Index>(output_width))
{
    if (state_width < 1 || output_width < 1) throw InvalidArgument("regression widths must be positive");
    r_.resize(0, width_);
    qty_.resize(0, outputs_);
}

void LeastSquaresAccumulator::append(const RealMatrix& states, const RealMatrix& targets)
{
    if (states.cols() != width_ || targets.cols() != outputs_)
        throw InvalidArgument("appended block has the wrong width");
    if (states.rows() != targets.rows()) throw InvalidArgument("states and targets must have equal row counts");
    if (!states.allFinite() || !targets.allFinite()) throw InvalidArgument("regression data contains non-finite values");
    if (states.rows() == 0) return;

    RealMatrix stacked(r_.rows() + states.rows(), width_);
    stacked << r_, states;
    RealMatrix rhs(qty_.rows() + targets.rows(), outputs_);
    rhs << qty_, targets;

    Eigen::HouseholderQR<RealMatrix> qr(stacked);
    const Eigen::Index k = std::min(stacked.rows(), width_);
    rhs.applyOnTheLeft(qr.householderQ().transpose());
    r_ = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    qty_ = rhs.topRows(k);
    rows_seen_ += static_cast<std::size_t>(states.rows());
}

ReadoutWeights LeastSquaresAccumulator::solve(const ReadoutOptions& options) const
{
    if (rows_seen_ == 0) throw InvalidArgument("cannot train a readout on an empty problem");
    if (!(options.rcond >= 0.0) || !(options.ridge >= 0.0)) throw InvalidArgument("rcond and ridge must be non-negative");

    Eigen::BDCSVD<RealMatrix> svd(r_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sigma = svd.singularValues();
    const double cutoff = sigma.size() > 0 ? options.rcond * sigma(0) : 0.0;
    RealVector inverse(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        const double s = sigma(i);
        if (s <= cutoff || s == 0.0)
            inverse(i) = 0.0;
        else
            inverse(i) = s / (s * s + options.ridge);
    }
    const RealMatrix solution = svd.matrixV() * (inverse.asDiagonal() * (svd.matrixU().transpose() * qty_));
    return ReadoutWeights{solution.transpose()};
}

ReadoutWeights train_pseudo_inverse(const RegressionProblem& problem, const ReadoutOptions& options)
{
    if (problem.states.rows() == 0 || problem.states.cols() == 0 || problem.targets.cols() == 0)
        throw InvalidArgument("cannot train a readout on an empty problem");
    LeastSquaresAccumulator acc(static_cast<std::size_t>(problem.states.cols()),
                                static_cast<std::size_t>(problem.targets.cols()));
    acc.append(problem.states, problem.targets);
    return acc.solve(options);
}

RealMatrix predict(const ReadoutWeights& weights, const RealMatrix& states)
{
    if (weights.matrix.cols() != states.cols())
        throw InvalidArgument("readout expects state width " + std::to_string(weights.matrix.cols()) + ", got " +
                              std::to_string(states.cols()));
    return states * weights.matrix.transpose();
}

RealMatrix predict(const ReadoutWeights& weights, const StateTrajectory& trajectory, std::size_t washout)
{
    if (washout >= trajectory.steps())
        throw InvalidArgument("washout (" + std::to_string(washout) + ") must be shorter than the trajectory (" +
                              std::to_string(trajectory.steps()) + ")");
    const auto rows = static_cast<Eigen::Index>(trajectory.steps() - washout);
    return predict(weights, RealMatrix(trajectory.states.bottomRows(rows)));
}

double mse(const RealMatrix& predictions, const RealMatrix& targets)
{
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw InvalidArgument("mse needs equally shaped predictions and targets");
    if (predictions.size() == 0) throw InvalidArgument("mse of an empty sequence");
    return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

}  // namespace deepesn
