#ifndef POLYALG_ERRORS_HPP
#define POLYALG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace polyalg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested Hilbert space exceeds the configured state bound.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Mode or tensor index outside the valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Operands live on different Fock spaces or have incompatible shapes.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied parameters (asymmetric tensors, non-hermitian couplings, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IllPosedFitError : public Error {
 public:
  using Error::Error;
};

/// The operator structure does not match what the model guarantees.
class ModelViolationError : public Error {
 public:
  using Error::Error;
};

class RepresentationDefectError : public Error {
 public:
  using Error::Error;
};

class SpectralAnomalyError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class UnsupportedReductionError : public Error {
 public:
  using Error::Error;
};

/// Evolution was asked to run with a Hamiltonian that leaks out of its block.
class NonInvariantError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double reached_time)
      : Error(what + " (reached t = " + std::to_string(reached_time) + ")"),
        reached_time_(reached_time) {}

  double reached_time() const { return reached_time_; }

 private:
  double reached_time_;
};

}  // namespace polyalg

#endif  // POLYALG_ERRORS_HPP
