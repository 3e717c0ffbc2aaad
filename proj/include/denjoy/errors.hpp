#pragma once

#include <stdexcept>
#include <string>

namespace denjoy {

// Input outside the declared domain of an operation.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid parameters or a failed configuration guard.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An orbit left the realized (truncated) part of a gap catalog.
struct truncation_error : std::runtime_error {
    long last_valid;
    truncation_error(const std::string& what, long last_valid_step = -1)
        : std::runtime_error(what), last_valid(last_valid_step) {}
};

// A checked hypothesis of a lemma does not hold for the given input.
struct precondition_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Should never fire; signals a bug such as a non-monotone map.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace denjoy
