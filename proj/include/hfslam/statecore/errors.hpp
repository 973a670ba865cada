#pragma once

#include <stdexcept>
#include <string>

namespace hfslam {

/// Total observation likelihood is zero under the current belief. Callers
/// (particle filters, the queue) decide their own recovery; nothing in the
/// library silently resets to uniform.
class ImpossibleObservation : public std::runtime_error {
 public:
  explicit ImpossibleObservation(const std::string& what)
      : std::runtime_error(what) {}
};

/// Structured-text input could not be parsed. Carries the 1-based line
/// number of the offending line (0 when not line-addressable).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A request exceeds a hard capacity bound (dense joint too large, cycle
/// enumeration too big). Distinct from invalid_argument: the input is
/// well-formed, just out of supported range.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

namespace statecore {
using hfslam::CapacityError;
using hfslam::ImpossibleObservation;
using hfslam::ParseError;
}  // namespace statecore

}  // namespace hfslam
