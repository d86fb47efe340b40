#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace baw {

// Base class for all toolkit errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Violated precondition or out-of-range argument.
class argument_error : public error {
public:
    using error::error;
};

// Unknown name in a database lookup; the message lists what is available.
class lookup_error : public error {
public:
    using error::error;
};

// Malformed input file; carries the source location.
class parse_error : public error {
public:
    parse_error(const std::string& what_arg, std::filesystem::path file_arg, long line_arg)
        : error(file_arg.string() + ":" + std::to_string(line_arg) + ": " + what_arg),
          file(std::move(file_arg)),
          line(line_arg) {}

    std::filesystem::path file;
    long line;
};

// Numerical failure (non-convergent eigensolve, singular system, ...).
class numeric_error : public error {
public:
    using error::error;
};

// Geometry or configuration violates a structural constraint.
class constraint_error : public error {
public:
    using error::error;
};

}  // namespace baw
