#ifndef HAPQ_ERRORS_HPP
#define HAPQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hapq {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Link geometry is impossible (platform below ground station, Earth-blocked path, ...).
class invalid_geometry : public error {
public:
    using error::error;
};

/// Adaptive quadrature did not reach its tolerance inside the evaluation budget.
class quadrature_failure : public error {
public:
    using error::error;
};

/// A physical relation of the model broke down (e.g. W_LT^2 < <r_c^2>).
class model_breakdown : public error {
public:
    using error::error;
};

/// Tabulated distribution failed its normalization or sanity checks.
class numeric_failure : public error {
public:
    using error::error;
};

/// Input file could not be parsed. Carries the 1-based line number when known.
class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t line = 0)
        : error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parsed data violates a documented invariant (unsorted axis, value out of range).
class invariant_violation : public error {
public:
    using error::error;
};

/// Configuration key unknown or value outside its physical range.
class config_error : public error {
public:
    using error::error;
};

}  // namespace hapq

#endif  // HAPQ_ERRORS_HPP
