#pragma once

#include <stdexcept>
#include <string>

namespace spectralens {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent user input: malformed files, invalid arguments.
/// The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

class FormatError : public InputError {
public:
    using InputError::InputError;
};

class LengthError : public InputError {
public:
    using InputError::InputError;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class InvalidArgument : public InputError {
public:
    using InputError::InputError;
};

/// A computation could not produce a trustworthy result. The CLI maps these
/// to exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

class InsufficientSpectrum : public NumericError {
public:
    using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

/// The requested size exceeds what the chosen algorithm supports.
class CapabilityError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace spectralens
