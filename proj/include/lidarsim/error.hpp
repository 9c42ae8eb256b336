#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lidarsim
{

/// Thrown when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Malformed input file. `line()` is 1-based, or 0 when not tied to a line.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what)
        , source_(source)
        , line_(line)
    {
    }

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

} // namespace lidarsim
