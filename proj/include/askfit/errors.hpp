#pragma once
#include <stdexcept>

namespace askfit {

// Argument outside an operation's mathematical domain (negative sample, bad level order, ...).
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Base class for numerical failures; the CLI maps these to exit status 5.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data cannot support the requested fit (empty, all-zero, all-equal).
struct degenerate_data_error : numerical_error {
    using numerical_error::numerical_error;
};

// Iterative estimator exhausted its iteration cap without meeting tolerance.
struct non_convergence_error : numerical_error {
    using numerical_error::numerical_error;
};

// Config invariant violation; the message names the offending key (exit status 4).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file contents or unknown key (exit status 3).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Missing or unreadable/unwritable file (exit status 2).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace askfit
