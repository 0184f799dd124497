#ifndef QKD_ERRORS_HPP
#define QKD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qkd {

// Precondition or argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed to converge or overflowed. Never silent.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A decoy-state bound is invalid (required condition violated, denominator
// non-positive, ...). Callers must treat the bound as unusable, not as zero.
class InvalidBoundError : public std::runtime_error {
public:
    explicit InvalidBoundError(const std::string& what) : std::runtime_error(what) {}
};

// Input file could not be parsed; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class InsufficientDataError : public std::runtime_error {
public:
    explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

class DegenerateFitError : public std::runtime_error {
public:
    explicit DegenerateFitError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qkd

#endif // QKD_ERRORS_HPP
