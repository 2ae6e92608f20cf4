#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ngrc {

/// Base for every error raised by the library. CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive step controller fell below its floor.
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(double t, double h)
      : Error("step size underflow at t=" + std::to_string(t) +
              " (h=" + std::to_string(h) + ")"),
        time(t) {}
  double time;
};

/// A state component became NaN or infinite. `index` is the sample (or
/// forecast step) at which it happened.
class NonFiniteState : public Error {
 public:
  explicit NonFiniteState(std::size_t idx, const std::string& where = "state")
      : Error("non-finite " + where + " at step " + std::to_string(idx)), index(idx) {}
  std::size_t index;
};

class WindowNotFull : public Error {
 public:
  WindowNotFull(std::size_t have, std::size_t need)
      : Error("delay window holds " + std::to_string(have) + " of " + std::to_string(need) +
              " states") {}
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class DegenerateTruth : public Error {
 public:
  using Error::Error;
};

class LadderGap : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or configuration value (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ngrc
