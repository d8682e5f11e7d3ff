#pragma once

#include <stdexcept>
#include <string>

namespace aquasynth {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array shapes disagree, or a dimension is too small.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A scalar argument lies outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A spectral query falls outside the support of the tabulated curve.
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// A normalization integral or min-max range collapsed to zero.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Forward-scatter exponent exceeds the beam attenuation (G_c > beta_D).
class ParametrizationError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf showed up in an intermediate term.
class NumericalFault : public Error {
public:
    using Error::Error;
};

/// Malformed or unsupported file content.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while writing.
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value. The message starts with the offending key path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key_path, const std::string& what)
        : Error(key_path + ": " + what), key_path_(key_path) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

} // namespace aquasynth
