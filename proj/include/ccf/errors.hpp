#pragma once

#include <stdexcept>
#include <string>

namespace ccf {

/// Bad caller-supplied data: wrong shapes, out-of-range labels, missing
/// classes. The CLI maps every subclass of this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few rows for a covariance estimate.
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// A file could not be read or its contents disagree with its header.
class LoadError : public InputError {
 public:
  using InputError::InputError;
};

/// Malformed text document (model file, CSV). Messages carry line/field context.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Not enough samples of some class to draw a balanced training set.
class ImbalanceError : public InputError {
 public:
  using InputError::InputError;
};

/// Invalid configuration, e.g. a singular geotransform.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace ccf
