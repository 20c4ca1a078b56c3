#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jamdet {

// Precondition violated (bad argument value, empty input, single-class data...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Tensor shapes that cannot be combined.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operation not allowed in the object's current state (e.g. normalizing twice).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// NaN/Inf detected where finite values are required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input. `line()` is 1-based; 0 means "not line specific".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Filesystem failure; message always names the path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace jamdet
