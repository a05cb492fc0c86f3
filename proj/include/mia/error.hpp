#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mia {

// Error hierarchy shared by the library and the CLI. The exit code is the
// process exit status contract: 2 validation, 3 runtime/numerical, 4 I/O.
class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

// Bad arguments, bad configuration, violated preconditions.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg, 2) {}
};

// Numerical failures at runtime (divergent training, non-finite values).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg, 3) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg, 4) {}
};

// Malformed file contents; carries the byte offset of the defect.
class FormatError : public IoError {
public:
    FormatError(const std::string& msg, std::uint64_t offset)
        : IoError(msg + " at byte offset " + std::to_string(offset)),
          offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

}  // namespace mia
