#pragma once

#include <stdexcept>
#include <string>

namespace flowcast {

// Base class for all library errors. Subclasses map to the failure kinds
// surfaced by the public API; the CLI translates ConfigError to exit 2 and
// everything else to exit 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

class InvalidParameterError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Integration blew up; carries the step at which a non-finite state appeared.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, long step) : Error(msg), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class WidthMismatchError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace flowcast
