#pragma once

#include <stdexcept>
#include <string>

namespace lhom {

// Base for every failure the library reports. Verification failures
// (symmetry, positivity, bounds, gaps) derive from VerificationError so the
// CLI can map them to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class VerificationError : public Error {
 public:
  using Error::Error;
};

class SymmetryViolation : public VerificationError {
 public:
  using VerificationError::VerificationError;
};

class PositivityUncertified : public VerificationError {
 public:
  PositivityUncertified(const std::string& what, double certified_lower)
      : VerificationError(what), certified_lower_(certified_lower) {}
  double certified_lower() const noexcept { return certified_lower_; }

 private:
  double certified_lower_;
};

class TruncationTooSmall : public Error {
 public:
  using Error::Error;
};

class QuadratureNotConverged : public Error {
 public:
  using Error::Error;
};

class BoundViolated : public VerificationError {
 public:
  using VerificationError::VerificationError;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class GapViolation : public VerificationError {
 public:
  using VerificationError::VerificationError;
};

class ContourTooClose : public VerificationError {
 public:
  using VerificationError::VerificationError;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class TruncationUnstable : public VerificationError {
 public:
  using VerificationError::VerificationError;
};

}  // namespace lhom
