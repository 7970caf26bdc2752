#pragma once
#include <stdexcept>
#include <string>

namespace vp {

// Base for every failure mode raised by the solver components.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// geometry
struct OutsideDomain : Error { using Error::Error; };
struct AmbiguousProjection : Error { using Error::Error; };
struct DegenerateFrame : Error { using Error::Error; };
struct FrameInvalid : Error { using Error::Error; };

// field
struct SolverDivergence : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };
struct FieldEvalFailure : Error { using Error::Error; };
struct NonpositiveMargin : Error { using Error::Error; };
struct LadderExitsGrid : Error { using Error::Error; };

// dynamics
struct StuckAtBoundary : Error { using Error::Error; };

// kinetic
struct ParticleOutside : Error { using Error::Error; };
struct EmptySupport : Error { using Error::Error; };
struct BlowupSuspected : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace vp
