#pragma once

#include <stdexcept>
#include <string>

namespace amrl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedTrajectory : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when an environment is driven outside its episode protocol,
// e.g. stepping after the terminal transition.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NonAbsorbingChain : public Error {
 public:
  using Error::Error;
};

class UnsupportedEnvironment : public Error {
 public:
  using Error::Error;
};

}  // namespace amrl
