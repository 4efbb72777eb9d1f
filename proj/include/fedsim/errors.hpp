#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Invalid user-supplied configuration (bad sizes, infeasible constraints, unknown keys).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (CSV parsing and similar). Carries a 1-based line number when known.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Non-finite values where finite math is required.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures, reported with the offending path.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fedsim
