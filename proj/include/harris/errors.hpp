#pragma once

#include <stdexcept>
#include <string>

namespace harris {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonMonotoneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSymmetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPsdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidCorrelationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TimeNotRecordedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace harris
