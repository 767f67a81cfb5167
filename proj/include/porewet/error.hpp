#pragma once

#include <stdexcept>
#include <string>

namespace porewet {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration value violates its documented range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Geometry does not fit the requested grid.
class DimensionError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace porewet
