#pragma once

#include <stdexcept>
#include <string>

namespace beamnf {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Input set is not admissible where admissibility is required.
struct AdmissibilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A divisor evaluated to (numerically) zero; carries the offending index tuple.
struct VanishingDenominatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigenvalues closer than the tolerance where a simple spectrum is required.
struct DegenerateSpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace beamnf
