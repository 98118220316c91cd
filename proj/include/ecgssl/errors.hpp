#pragma once

#include <stdexcept>
#include <string>

namespace ecgssl {

// Argument outside its documented domain (sample rate, heart rate, piece counts, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that is structurally fine but numerically unusable (NaN, Inf, bad scores).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TransferError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible file (recording, manifest, model container, config).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ecgssl
