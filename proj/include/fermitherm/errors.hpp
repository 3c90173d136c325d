#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fermitherm {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Base for every error raised by the library. `stage` is filled in by the
// study orchestration so that CLI messages can name where a failure happened.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}

  const std::string& stage() const { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

  std::string describe() const {
    return stage_.empty() ? std::string(what()) : "[" + stage_ + "] " + what();
  }

 private:
  std::string stage_;
};

// Configuration and input validation (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class AliasingError : public Error {
 public:
  using Error::Error;
};

class TailToleranceExceeded : public Error {
 public:
  TailToleranceExceeded(double tail_mass, double tail_tol)
      : Error("discarded kernel tail mass " + sci(tail_mass) + " exceeds tolerance " +
              sci(tail_tol) + "; increase radius or grid_n"),
        tail_mass_(tail_mass) {}
  double tail_mass() const { return tail_mass_; }

 private:
  double tail_mass_;
};

class NonHermitianKernel : public Error {
 public:
  using Error::Error;
};

class BoxTooLarge : public Error {
 public:
  using Error::Error;
};

// Symbol or spectrum leaves ]0,1[ (CLI exit code 2).
class NotRegular : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class SpectrumOutOfRange : public Error {
 public:
  using Error::Error;
};

// Numerical failures inside a computation stage (CLI exit code 3).
class EigensolveFailure : public Error {
 public:
  using Error::Error;
};

class NegativityViolation : public Error {
 public:
  using Error::Error;
};

class SingularState : public Error {
 public:
  using Error::Error;
};

// Dual optimizer did not reach its tolerance (CLI exit code 4).
class NonConvergence : public Error {
 public:
  NonConvergence(double residual, int iterations)
      : Error("max-entropy solver did not converge: residual " + sci(residual) + " after " +
              std::to_string(iterations) + " iterations"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace fermitherm
