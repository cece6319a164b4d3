#pragma once

#include <stdexcept>
#include <string>

namespace dsic {

// Error taxonomy shared across the library. Everything derives from
// std::runtime_error so callers can catch broadly or by kind.

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonScalarLoss : std::runtime_error {
  explicit NonScalarLoss(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidFactor : std::runtime_error {
  explicit InvalidFactor(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateOutput : std::runtime_error {
  explicit DegenerateOutput(const std::string& what) : std::runtime_error(what) {}
};

struct BadInputSize : std::runtime_error {
  explicit BadInputSize(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// I/O level failure (unreadable file, malformed config line, bad blob).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dsic
