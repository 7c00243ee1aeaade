#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgibbs {

// Enumeration or iteration budget exceeded. Carries the configured cap and
// the size that was requested so callers can report partial progress.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, std::size_t budget, std::size_t required)
        : std::runtime_error(what), budget(budget), required(required) {}
    std::size_t budget;
    std::size_t required;
};

// No unique fixed point found (reducible kernel, or iteration cap hit).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Conditioning on a zero-probability event.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A factorization structure does not hold for a measure.
class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pgibbs
