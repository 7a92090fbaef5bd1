#pragma once

#include <stdexcept>
#include <string>

namespace sarbnn {

// Shape mismatch inside a primitive. Carries the op name and both shapes so
// callers can report "conv2d: expected [.., 3, .., ..], got [..]".
class ShapeError : public std::invalid_argument {
public:
    ShapeError(std::string op, std::string expected, std::string got);

    const std::string& op() const noexcept { return op_; }
    const std::string& expected() const noexcept { return expected_; }
    const std::string& got() const noexcept { return got_; }

private:
    std::string op_;
    std::string expected_;
    std::string got_;
};

// NaN/Inf produced where a finite value was required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid architecture, manifest content, checkpoint, configuration value.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failures (missing file, short read, failed rename).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Misuse of the command surface (missing flags, contradictory options).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sarbnn
