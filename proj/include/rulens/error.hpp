#pragma once

#include <stdexcept>
#include <string>

namespace rulens {

// Bad input data, malformed files or model documents.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments or option combinations supplied by the caller.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace rulens
