#include "beamobs/error.hpp"

namespace beamobs {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Ambiguity: return "ambiguity";
    case ErrorKind::NumericRange: return "numeric-range";
    case ErrorKind::SearchRange: return "search-range";
    case ErrorKind::DegenerateSpectrum: return "degenerate-spectrum";
    case ErrorKind::NotAnEigenvalue: return "not-an-eigenvalue";
    case ErrorKind::DegenerateMode: return "degenerate-mode";
    case ErrorKind::Accuracy: return "accuracy";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::ShiftTooLarge: return "shift-too-large";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace beamobs
