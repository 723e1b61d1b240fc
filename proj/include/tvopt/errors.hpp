#pragma once

#include <stdexcept>
#include <string>

namespace tvopt {

// Error taxonomy: every throwing operation uses one of these, so callers can
// distinguish bad inputs from numerical breakdown from contract violations.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (alpha out of range, dimension mismatch, ...).
struct parameter_error : error {
    using error::error;
};

// Malformed or inconsistent scenario/CLI configuration.
struct config_error : error {
    using error::error;
};

// Non-finite values or divergence during iteration.
struct numerical_error : error {
    numerical_error(const std::string& what, long step = -1)
        : error(what), step_index(step) {}
    long step_index;  // iteration index at failure, -1 if not applicable
};

// A declared operator property (image bound, ...) observed to fail at runtime.
struct contract_error : error {
    using error::error;
};

// Operation not defined for this object (gradient of a nonsmooth function, ...).
struct unsupported_error : error {
    using error::error;
};

// Reference solver failed to reach tolerance within its iteration cap.
struct oracle_error : error {
    using error::error;
};

}  // namespace tvopt
