#pragma once

#include <stdexcept>
#include <string>

namespace brl {

// Base class for all domain errors raised by the laboratory.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Scenario input errors (CLI exit code 2).
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

// Numerical / geometric errors (CLI exit code 3).
struct PointNotOnBoundary : Error { using Error::Error; };
struct TangentialDirection : Error { using Error::Error; };
struct LeftDomain : Error { using Error::Error; };
struct EventLocalizationFailure : Error { using Error::Error; };
struct RayDidNotExit : Error { using Error::Error; };
struct ReflectionPatternChanged : Error { using Error::Error; };
struct NoDoubleHit : Error { using Error::Error; };
struct ObstacleInTheWay : Error { using Error::Error; };
struct NotATubeScenario : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

}  // namespace brl
