#ifndef ELENS_ERRORS_HPP
#define ELENS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace elens {

// Malformed external input (bad JSONL/CSV syntax, unknown fields).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input violating a domain invariant (negative amount, fee < 0,
// conflicting labels, schema width mismatch).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Unknown address/entity/transaction id.
class LookupError : public std::runtime_error {
public:
    explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

// Unusable configuration (empty price table, infeasible generator config,
// degenerate search box).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace elens

#endif
