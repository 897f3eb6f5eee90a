#pragma once

#include <stdexcept>
#include <string>

namespace deadbeat {

// Base of every error raised by the library. Catch this to handle all of them.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed arguments: shape mismatch, non-finite entries, out-of-range index.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A decomposition did not converge or an internal cross-check disagreed.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

// The primal gain algorithm needs A^{-1}; use the dual algorithm instead.
class SingularA : public Error {
public:
    using Error::Error;
};

// Gain synthesis found the pair (A, B) not controllable.
class Uncontrollable : public Error {
public:
    using Error::Error;
};

// Gain synthesis is scalar-input only.
class UnsupportedInputWidth : public Error {
public:
    using Error::Error;
};

// The set-intersection tracker found no nonempty level.
class NotControllable : public Error {
public:
    using Error::Error;
};

// A state or input left the domain of a nonlinear example system.
class DomainViolation : public Error {
public:
    using Error::Error;
};

class DivergedAtStep : public Error {
public:
    DivergedAtStep(int step, const std::string& what)
        : Error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

    [[nodiscard]] int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace deadbeat
