#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace taxrewire {

/// Base class for every error raised by the library. The CLI maps each
/// subclass to its own exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, or 0 when the error is not tied
/// to a particular line (e.g. an empty file).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Structural violation of the tree invariants, or an unknown node.
class TaxonomyError : public Error {
public:
    using Error::Error;
};

/// Invalid dataset contents or arguments to data operations.
class DataError : public Error {
public:
    using Error::Error;
};

/// Model file does not belong to the hierarchy it is used with.
class FingerprintMismatch : public Error {
public:
    using Error::Error;
};

/// Invalid argument combination or value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Collects non-fatal warnings. Functions take an optional pointer; a null
/// sink discards them.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message)
{
    if (diag != nullptr) diag->warn(std::move(message));
}

} // namespace taxrewire
