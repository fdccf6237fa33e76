#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace homog {

/// Base class for all workbench errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};
struct NonSymmetric : Error {
  using Error::Error;
};
struct UnknownName : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct IllConditioned : Error {
  using Error::Error;
};
struct EpsilonOutOfRange : Error {
  using Error::Error;
};
struct GridTooCoarse : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};
struct EmptyRegion : Error {
  using Error::Error;
};
struct RegionNotNested : Error {
  using Error::Error;
};
struct TooThick : Error {
  using Error::Error;
};
struct TooFewPoints : Error {
  using Error::Error;
};
struct DivergenceNotZero : Error {
  using Error::Error;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace homog
