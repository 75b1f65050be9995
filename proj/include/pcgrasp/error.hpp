#pragma once

#include <stdexcept>
#include <string>

namespace pcgrasp {

/// Base of every error the library reports. The CLI maps the subclasses to
/// stable exit codes (config 2, I/O 3, schema 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter or configuration value outside its valid range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed input file, or an input whose shape does not
/// match what the caller declared.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Structured input (records, manifests, ledgers) that does not match the
/// expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Geometric degeneracy: collinear sample triple, point behind the camera,
/// camera inside an object.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcgrasp
