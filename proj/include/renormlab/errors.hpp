#pragma once

#include <stdexcept>
#include <string>

namespace renormlab {

// Base class for all library errors. Subclasses carry the failure kind in
// the type so callers (CLI, bindings) can map them to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DanglingClassError : Error { using Error::Error; };
struct BadMultiplicityError : Error { using Error::Error; };
struct ParamOutOfRangeError : Error { using Error::Error; };
struct SizeBudgetExceededError : Error { using Error::Error; };
struct UnknownNodeError : Error { using Error::Error; };
struct InvalidWeightError : Error { using Error::Error; };
struct IndexOutOfRangeError : Error { using Error::Error; };
struct ShapeViolationError : Error { using Error::Error; };
struct UnsupportedPresentationError : Error { using Error::Error; };
struct NonContractionError : Error { using Error::Error; };
struct IllegalMoveError : Error { using Error::Error; };
struct SchemaMismatchError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Premise failures carry a witness description (node/class names involved).
struct PremiseViolatedError : Error {
    std::string witness;
    PremiseViolatedError(const std::string& msg, std::string w)
        : Error(msg + " [witness: " + w + "]"), witness(std::move(w)) {}
};

}  // namespace renormlab
