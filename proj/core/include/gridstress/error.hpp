#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridstress {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
    Parse,       ///< malformed case text
    Validation,  ///< a model invariant does not hold
    Config,      ///< bad user configuration (scenario, policy, monitor sets)
    Singular,    ///< susceptance system cannot be factored
    Islanding,   ///< requested outage or switch disconnects the network
    Infeasible,  ///< dispatch cannot satisfy load within generator limits
    Io,          ///< file cannot be read or written
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failure carrying the 1-based line of the offending row (0 when unknown).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace gridstress
