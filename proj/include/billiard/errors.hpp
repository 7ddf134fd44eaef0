#pragma once

#include <stdexcept>
#include <string>

namespace billiard {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Table parameters violate their invariants (which one is in the message).
struct InvalidParams : Error { using Error::Error; };

// A validation check on a built table failed; message names the first failed check.
struct GeometryInvalid : Error { using Error::Error; };

// Arclength coordinate outside [0, perimeter].
struct OutOfRange : Error { using Error::Error; };

// Trajectory hit the vertex, a junction, or left a collision numerically grazing.
struct SingularHit : Error { using Error::Error; };

// Ray found no boundary intersection; unreachable on a valid table.
struct NoIntersection : Error { using Error::Error; };

// A cusp excursion exceeded the hard bounce cap.
struct RunawayOrbit : Error { using Error::Error; };

// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureFailure : Error { using Error::Error; };

// Operation assumes the totally skewed regime (I_f > 0) and it does not hold.
struct NotApplicable : Error { using Error::Error; };

// Estimator input below its sample floor or degenerate.
struct InsufficientData : Error { using Error::Error; };

// Experiment configuration schema violation; message carries a JSON pointer.
struct ConfigError : Error { using Error::Error; };

// Corner series with no bounce below the segmentation threshold.
struct DegenerateSeries : Error { using Error::Error; };

} // namespace billiard
