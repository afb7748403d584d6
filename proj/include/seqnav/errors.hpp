#pragma once

#include <stdexcept>
#include <string>

namespace seqnav {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// geodesy: the two fixes are closer than the coincidence tolerance, so the
// bearing is undefined; callers should hold the previous bearing.
struct CoincidentFixes : Error {
  using Error::Error;
};

// A time interval that must be strictly positive was not.
struct NonPositiveInterval : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct ClassOutOfRange : Error {
  using Error::Error;
};

struct AlphaOutOfRange : Error {
  using Error::Error;
};

// planner: both aim waypoints sit at the origin, heading reference undefined;
// callers should hold the previous motion reference.
struct DegenerateAim : Error {
  using Error::Error;
};

struct NonFiniteLoss : Error {
  using Error::Error;
};

struct EmptySplit : Error {
  using Error::Error;
};

struct RouteTooShort : Error {
  using Error::Error;
};

struct InvalidSpec : Error {
  using Error::Error;
};

struct NoValidPixels : Error {
  using Error::Error;
};

struct BadMagic : Error {
  using Error::Error;
};

struct UnsupportedVersion : Error {
  using Error::Error;
};

struct TruncatedPayload : Error {
  using Error::Error;
};

struct BadLog : Error {
  using Error::Error;
};

struct ConfigMismatch : Error {
  using Error::Error;
};

}  // namespace seqnav
