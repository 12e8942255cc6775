#pragma once

#include <stdexcept>
#include <string>

namespace lisa {

// Base for all runtime failures raised by the library. Parse problems in the
// agent DSL are reported as Diagnostic lists instead; everything that can go
// wrong after a successful parse throws one of these.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A predicate or action was used that the program never declares.
struct DeclarationError : Error { using Error::Error; };

// A distribution does not sum to one, a probability is out of range, or a
// model row is malformed.
struct ModelError : Error { using Error::Error; };

// State-space construction exceeded the configured cap.
struct StateOverflowError : Error { using Error::Error; };

// An iterative solver failed to reach the requested residual.
struct ConvergenceError : Error { using Error::Error; };

// Strict elaboration found more than one enabled option in some state.
struct NondeterminismError : Error { using Error::Error; };

// An update pushed a variable outside its declared range.
struct RangeError : Error { using Error::Error; };

// A reachability query references an unknown identifier or unsupported form.
struct QueryError : Error { using Error::Error; };

// A policy picked a plan that is not triggered at the node.
struct PolicyError : Error { using Error::Error; };

// The implication table lacks an entry for a triggered plan.
struct CompletenessError : Error { using Error::Error; };

} // namespace lisa
