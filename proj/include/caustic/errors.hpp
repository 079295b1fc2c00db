#pragma once

#include <stdexcept>
#include <string>

namespace caustic {

/// Base of every error raised by the library. `kind()` is a stable tag used
/// by the CLI to map failures onto exit codes and report fields.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

  /// True for failures of the numerics (as opposed to bad input).
  virtual bool numerical() const noexcept { return true; }

 private:
  std::string kind_;
};

/// Bad grid sizes, orders, flags and the like.
class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what) : Error("configuration", what) {}
  bool numerical() const noexcept override { return false; }
};

/// Malformed or inconsistent input data (files, presets, profiles).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
  bool numerical() const noexcept override { return false; }
};

/// A precondition on function values failed; carries the measured quantity.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double measured)
      : Error("domain", what), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

class DegenerateSpeedError : public Error {
 public:
  explicit DegenerateSpeedError(const std::string& what) : Error("degenerate-speed", what) {}
};

class ConvexityLossError : public Error {
 public:
  explicit ConvexityLossError(const std::string& what) : Error("convexity-loss", what) {}
};

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& what) : Error("resolution", what) {}
};

class SingularChordError : public Error {
 public:
  explicit SingularChordError(const std::string& what) : Error("singular-chord", what) {}
};

class GeometricFailure : public Error {
 public:
  explicit GeometricFailure(const std::string& what) : Error("geometric-failure", what) {}
};

class JetExtractionError : public Error {
 public:
  explicit JetExtractionError(const std::string& what) : Error("jet-extraction", what) {}
};

class NormalFormError : public Error {
 public:
  explicit NormalFormError(const std::string& what) : Error("normal-form", what) {}
};

class InitializerError : public Error {
 public:
  explicit InitializerError(const std::string& what) : Error("initializer", what) {}
};

class StepFailure : public Error {
 public:
  explicit StepFailure(const std::string& what) : Error("step-failure", what) {}
};

class DegenerateEnvelopeError : public Error {
 public:
  explicit DegenerateEnvelopeError(const std::string& what) : Error("degenerate-envelope", what) {}
};

}  // namespace caustic
