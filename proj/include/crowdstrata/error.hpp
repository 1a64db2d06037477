#pragma once

#include <stdexcept>
#include <string>

namespace crowdstrata {

/// Malformed textual input (CSV/JSON). Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Index or count bounds outside a histogram or partition.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A caller broke an operation's precondition (e.g. y outside its bin).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace crowdstrata
