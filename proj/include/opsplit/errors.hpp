#pragma once

// Exception types thrown by the opsplit library. Every error derives from
// opsplit::Error so callers can catch the whole family at once.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opsplit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shapes that do not fit together (non-square, mismatched lengths, ...).
struct DimensionError : Error {
    using Error::Error;
};

// Values outside the admissible domain (NaN/Inf entries, b < a, ...).
struct DomainError : Error {
    using Error::Error;
};

// Operator kinds the schemes refuse to handle, e.g. a time-dependent
// operator that is not diagonal.
struct UnsupportedOperatorError : Error {
    using Error::Error;
};

// A state or iterate left the finite range during integration.
struct DivergenceError : Error {
    using Error::Error;
};

// Wraps an error raised while marching step `step` of a time grid.
class StepError : public Error {
public:
    StepError(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace opsplit
