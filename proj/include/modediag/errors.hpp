#pragma once

#include <stdexcept>
#include <string>

namespace modediag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// I - A is numerically singular (the loop is marginally stable or unstable).
class NearSingular : public Error {
public:
    using Error::Error;
};

class Unstable : public Error {
public:
    using Error::Error;
};

class RepeatedRoots : public Error {
public:
    using Error::Error;
};

/// Decay rate outside (0, 1): timing bounds are undefined.
class DegenerateRate : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SynthesisInfeasible : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or data file. `path` names the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace modediag
