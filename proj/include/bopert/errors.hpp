#pragma once

#include <stdexcept>

namespace bopert {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SampleCountTooSmall : Error { using Error::Error; };
struct RealnessViolation : Error { using Error::Error; };
struct KappaOutOfRange : Error { using Error::Error; };
struct NonpositiveDepth : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct ThresholdNotFound : Error { using Error::Error; };
struct QuadratureNotConverged : Error { using Error::Error; };
struct MeanResidual : Error { using Error::Error; };
struct BlowupDetected : Error { using Error::Error; };
struct CountExceedsDim : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace bopert
