#pragma once

#include <stdexcept>
#include <string>

namespace ustrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A frame or file could not be read or decoded.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Inputs are individually readable but inconsistent with each other
/// (frame sizes differ, raw blob length disagrees with the manifest).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

/// Data parsed fine but breaks a domain invariant (point outside the frame...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parallel or degenerate lines.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace ustrack
