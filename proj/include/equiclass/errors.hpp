#pragma once

#include <stdexcept>
#include <string>

namespace equiclass {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- table validation ---

struct NonPositiveInput : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonFiniteEntry : Error {
    using Error::Error;
};

// --- assembly ---

struct ObjectNotInCategory : Error {
    using Error::Error;
};

struct BadExplicitShape : Error {
    using Error::Error;
};

/// Explicit per-row uncertainty matrices are pinned to one category and
/// cannot follow the mutating categories of a classification search.
struct ExplicitSpecInSearch : Error {
    using Error::Error;
};

// --- solving ---

/// All tolerance profiles were exhausted without a certified solve.
struct SolverFailure : Error {
    using Error::Error;
};

/// The doubling search for a capable sigma exceeded its cap, which signals
/// rank-deficient uncertainty structure or pathological data.
struct CapabilityNotReached : Error {
    using Error::Error;
};

// --- seeding ---

struct InfeasibleSizes : Error {
    using Error::Error;
};

// --- ingestion ---

struct MissingColumn : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(std::size_t row, std::size_t column, const std::string& what)
        : Error("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
          row(row),
          column(column) {}
    std::size_t row;
    std::size_t column;
};

}  // namespace equiclass
