#pragma once

#include <stdexcept>
#include <string>

namespace quadcav {

/// Raised when an operation is called outside its mathematical domain
/// (zero cavity response, non-normalized field, HP breakdown, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative solver fails in a way the caller cannot recover
/// from through a flag (NaN blow-up, root finder stall).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace quadcav
