#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beamobs {

enum class ErrorKind {
    Parameter,        // invalid physical or numerical parameter
    Domain,           // abscissa or index outside the admissible set
    Ambiguity,        // one-sided quantity requested without a side
    NumericRange,     // overflow / non-finite intermediate
    SearchRange,      // root scan exhausted before enough roots
    DegenerateSpectrum,
    NotAnEigenvalue,
    DegenerateMode,
    Accuracy,         // quadrature or iteration did not reach its tolerance
    Shape,            // actuator shape violates its support constraints
    Conditioning,     // non-finite propagator, singular matrix
    Configuration,    // scenario or CLI configuration problem
    ShiftTooLarge,
    InsufficientData,
    UndefinedMetric,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace beamobs
