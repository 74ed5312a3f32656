#pragma once

#include <stdexcept>
#include <string>

namespace diffuse {

// Error taxonomy used across the library. The CLI maps these onto exit
// codes: usage/data problems -> 2, numerical failures -> 3.

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when training diverges; carries the step at which it happened.
struct TrainingError : std::runtime_error {
    long step = -1;
    TrainingError(const std::string& what, long step_index)
        : std::runtime_error(what), step(step_index) {}
};

struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace diffuse
