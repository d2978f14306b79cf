#pragma once

#include <stdexcept>
#include <string>

namespace kmaha {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid parameters, unknown names.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce a result (singular system,
/// infeasible program, iteration cap without convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularKernelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InfeasibleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace kmaha
