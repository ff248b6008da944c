#pragma once

#include <stdexcept>
#include <string>

namespace specklab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grids that must agree do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is missing or unusable (empty corpus, unreadable image).
class InputError : public Error {
 public:
  using Error::Error;
};

/// The problem is well-formed but carries no information (e.g. zero magnitude).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Stored data does not match its recorded digest or is truncated.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace specklab
