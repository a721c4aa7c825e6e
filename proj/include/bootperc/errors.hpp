#pragma once

#include <stdexcept>
#include <string>

namespace bootperc {

// Invalid arguments are reported with std::invalid_argument. The three types
// below map onto the CLI exit codes (2, 3, 4).

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace detail
}  // namespace bootperc
