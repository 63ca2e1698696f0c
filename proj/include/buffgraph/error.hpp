#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace buffgraph {

/// Base class for all buffgraph errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument, configuration value, or broken invariant.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Non-finite value encountered in a numeric routine.
class NumericError : public Error {
public:
    using Error::Error;
};

enum class DatasetErrorKind {
    kMissingFile,
    kParse,            // non-integer / non-numeric field
    kInvalidNodeId,    // edge endpoint outside [0, N)
    kRowCountMismatch, // per-node file disagrees with node count
    kLabelOutOfRange,
};

/// Error while reading or validating a dataset directory. Carries the
/// offending file and 1-based line number (0 when not line-specific).
class DatasetError : public Error {
public:
    DatasetError(DatasetErrorKind kind, std::string file, std::size_t line,
                 const std::string& detail)
        : Error(line > 0 ? file + ":" + std::to_string(line) + ": " + detail
                         : file + ": " + detail),
          kind_(kind),
          file_(std::move(file)),
          line_(line) {}

    DatasetErrorKind kind() const noexcept { return kind_; }
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    DatasetErrorKind kind_;
    std::string file_;
    std::size_t line_;
};

} // namespace buffgraph
