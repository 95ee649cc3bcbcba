#pragma once

#include <stdexcept>
#include <string>

namespace impactor {

/// Bad input or configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown (non-finite intermediates, divergence). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace impactor
