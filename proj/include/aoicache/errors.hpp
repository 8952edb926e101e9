#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aoicache {

/// Invalid configuration value; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed input file row.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, std::size_t line, const std::string& message)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
          file_(std::move(file)),
          line_(line) {}
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// A cache transaction would push occupancy above the capacity.
class CapacityExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The prediction plugin broke the line protocol or timed out.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A strategy emitted a plan that breaks the purchasing or prefix rules.
class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aoicache
