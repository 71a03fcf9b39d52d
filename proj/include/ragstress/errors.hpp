#pragma once

#include <stdexcept>
#include <string>

namespace ragstress {

/// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (bad TSV row, rank gap, duplicate id, ...).
struct FormatError : Error {
    using Error::Error;
};

// Lookup of an id that is not present.
struct NotFoundError : Error {
    using Error::Error;
};

// A sampler ran out of eligible candidates.
struct ExhaustedError : Error {
    using Error::Error;
};

// A required upstream artifact is missing (e.g. a counterfactual rewrite).
struct DependencyError : Error {
    using Error::Error;
};

// Generator output could not be parsed back into labels.
struct ParseError : Error {
    using Error::Error;
};

// Wrong number of items (labels, rows, samples).
struct ArityError : Error {
    using Error::Error;
};

// Invalid argument to an operation.
struct InputError : Error {
    using Error::Error;
};

// Endpoint unreachable or retry budget exhausted on transient failures.
struct TransportError : Error {
    using Error::Error;
};

// Endpoint answered with a non-retryable error status.
struct EndpointError : Error {
    using Error::Error;
};

// LLM output failed validation after the retry budget.
struct GenerationError : Error {
    using Error::Error;
};

// Result sets cover different query sets and cannot be compared.
struct ComparabilityError : Error {
    using Error::Error;
};

}  // namespace ragstress
