#pragma once

#include <stdexcept>
#include <string>

namespace roughsk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model field evaluated to NaN or infinity.
class NonFiniteField : public Error {
public:
    using Error::Error;
};

class UnknownModel : public Error {
public:
    explicit UnknownModel(const std::string& name);
};

/// The vectorised Lyapunov system is numerically singular; usually the
/// friction matrix has lost its positive-definite symmetric part.
class SingularSystem : public Error {
public:
    using Error::Error;
};

class StabilityViolation : public Error {
public:
    using Error::Error;
};

/// A simulated state left the blow-up ball.
class BlowUp : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace roughsk
