#pragma once

#include <stdexcept>
#include <string>

namespace nodal_lab {

// Base for everything this library throws. The CLI maps any Error to exit
// code 2; inequality violations are reported through CheckReport instead.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Size/depth guards (e.g. subdivision depth caps).
struct ResourceLimit : Error {
  using Error::Error;
};

// Mesh/field shape mismatches, mode evaluated on the wrong surface, etc.
struct GeometryMismatch : Error {
  using Error::Error;
};

// Identically-zero or otherwise unusable scalar fields.
struct DegenerateField : Error {
  using Error::Error;
};

// Empty vertex subsets, empty nodal sets, no interior vertices.
struct EmptyDomain : Error {
  using Error::Error;
};

// Zero-area faces and similar failures during operator assembly.
struct AssemblyError : Error {
  using Error::Error;
};

// Eigensolver did not reach the residual target; message carries residuals.
struct ConvergenceFailure : Error {
  using Error::Error;
};

// Lookup outside a profile's r grid.
struct GridRange : Error {
  using Error::Error;
};

// Closed-form curve requested for a mode/shape without one.
struct UnsupportedOracle : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace nodal_lab
