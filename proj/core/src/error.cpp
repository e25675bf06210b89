#include "gridstress/error.hpp"

namespace gridstress {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Config: return "config";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Islanding: return "islanding";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {
std::string with_line(std::size_t line, const std::string& what)
{
    if (line == 0) {
        return what;
    }
    return "line " + std::to_string(line) + ": " + what;
}
}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(ErrorKind::Parse, with_line(line, what)), line_(line)
{
}

}  // namespace gridstress
