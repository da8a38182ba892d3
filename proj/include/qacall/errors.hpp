#pragma once

#include <stdexcept>
#include <string>

namespace qacall {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A qubit budget or enumeration limit was exceeded.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Malformed operation: overlapping qubits, width mismatch, non-bijective map.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// The state did not satisfy an operation's precondition.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Invalid argument value (empty interval, zero shots, bad contract field).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Iteration failed to converge or a computed quantity left its valid range.
class NumericalError : public Error {
  public:
    using Error::Error;
};

} // namespace qacall
