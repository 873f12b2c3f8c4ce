#pragma once

#include <stdexcept>
#include <string>

namespace frd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidScale : Error {
    using Error::Error;
};

struct ZeroModeError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct ConfigurationError : Error {
    using Error::Error;
};

struct ParameterError : Error {
    using Error::Error;
};

struct DegenerateSupport : Error {
    using Error::Error;
};

struct MissingArtifacts : Error {
    using Error::Error;
};

} // namespace frd
