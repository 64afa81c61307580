// Exception taxonomy shared by all gridforge modules.
#pragma once

#include <stdexcept>
#include <string>

namespace gridforge {

// Base class; every gridforge failure derives from this.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied values (empty graph, out-of-range parameter, ...).
class InvalidInputError : public Error {
public:
  using Error::Error;
};

// Graph shape violations: non-radial input, disconnected support, missing root.
class StructureError : public Error {
public:
  using Error::Error;
};

// Unknown conductor code or inconsistent catalog entry.
class CatalogError : public Error {
public:
  using Error::Error;
};

// One-hot tensor slice with zero or multiple active entries.
class MalformedTensorError : public Error {
public:
  using Error::Error;
};

// Inconsistent module configuration (shape mismatch, tau <= 0, bad k range).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Bad data content: unmapped meter, degenerate cluster input, absent load host.
class DataError : public Error {
public:
  using Error::Error;
};

// Numeric breakdown: non-finite values, undefined correlation, bandwidth on
// zero-variance data.
class NumericError : public Error {
public:
  using Error::Error;
};

// Optimization / power-flow solver failures (exit code 3 territory).
class SolveError : public Error {
public:
  using Error::Error;
};

// Pipeline stage ordering violations and stale-manifest refusals.
class DependencyError : public Error {
public:
  using Error::Error;
};

}  // namespace gridforge
