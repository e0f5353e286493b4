#pragma once

#include <stdexcept>
#include <string>

namespace ovox {

/// Bad caller input: arguments, preconditions, out-of-range values.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation needs state the object does not carry (e.g. a grid without materials).
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File content is malformed or violates a data invariant.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ovox
