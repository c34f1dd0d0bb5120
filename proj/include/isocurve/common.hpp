// Shared aliases and error types used across the library.
#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>

namespace isocurve {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double kPi = 3.14159265358979323846;

// Error hierarchy. Operations throw; verdict-style queries return enums.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfChart : Error { using Error::Error; };
struct NonSmoothPoint : Error { using Error::Error; };
struct StepFailure : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DegenerateVertex : Error { using Error::Error; };
struct AmbiguousSide : Error { using Error::Error; };
struct NodeInSupport : Error { using Error::Error; };
struct AngleDegenerate : Error { using Error::Error; };
struct MultipleNodes : Error { using Error::Error; };
struct WrongFamily : Error { using Error::Error; };
struct SegmentTooLong : Error { using Error::Error; };
struct GeodesicSubproblemFailure : Error { using Error::Error; };
struct StabilityViolation : Error { using Error::Error; };
struct CollapseDetected : Error { using Error::Error; };
struct NoCollapse : Error { using Error::Error; };
struct ScaleTooLarge : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct EmbeddednessLost : Error { using Error::Error; };
struct IterationBudget : Error { using Error::Error; };
struct OrderingAmbiguous : Error { using Error::Error; };
struct NoNegativeDirection : Error { using Error::Error; };
struct RootBracketFailure : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Deterministic RNG; every stochastic routine takes an explicit seed.
inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace isocurve
