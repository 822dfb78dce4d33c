#pragma once

#include <stdexcept>
#include <string>

namespace noonlab
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// Base class for failures of the numerics themselves (truncation,
/// conditioning, convergence). The CLI maps these to exit status 3.
class NumericalError : public Error
{
public:
    using Error::Error;
};

class TruncationError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class DegenerateSubspaceError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

} // namespace noonlab
