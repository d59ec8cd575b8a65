#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uaix {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or layer shapes that do not compose. `layer()` is the offending
// layer index, or npos when the mismatch is not tied to a layer.
class ShapeError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ShapeError(const std::string& what, std::size_t layer = npos)
      : Error(layer == npos ? what : "layer " + std::to_string(layer) + ": " + what),
        layer_(layer) {}

  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A numerical computation produced NaN or Inf.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed file or text input.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace uaix
