#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepesn {

/// Dense 64-bit real matrix used for weights, state trajectories and targets.
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A random draw produced a matrix that cannot be rescaled (e.g. zero spectral radius).
class DegenerateDraw : public Error {
public:
    using Error::Error;
};

/// Series generation produced non-finite values.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

inline bool all_finite(const RealMatrix& m) { return m.allFinite(); }

}  // namespace deepesn
