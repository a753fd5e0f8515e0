#pragma once

#include <stdexcept>

namespace lshattn {

// Invalid configuration field values (zero/negative sizes, indivisible dims).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mismatched array dimensions between inputs.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Scalar argument outside its legal range.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Bad runtime input data (out-of-range token ids, overlong sequences).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lshattn
