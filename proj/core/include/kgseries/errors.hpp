#pragma once

#include <stdexcept>
#include <string>

namespace kgs {

/// Base class for all library errors. `category()` is the stable,
/// machine-readable tag surfaced in CLI reports and mapped to exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

private:
  std::string category_;
};

/// Invalid configuration value (bad parameter range, unknown key, ...).
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Wrong number of children handed to a graft.
struct ArityError : Error {
  explicit ArityError(const std::string& what) : Error("arity", what) {}
};

/// Malformed serialized input (tree keys, snapshot files, data specs).
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

/// Value outside the representable or addressable range.
struct RangeError : Error {
  explicit RangeError(const std::string& what) : Error("range", what) {}
};

/// Operands live on different grids / incompatible shapes.
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

/// Operation needs more samples than the field carries.
struct ResolutionError : Error {
  explicit ResolutionError(const std::string& what) : Error("resolution", what) {}
};

/// Numerical divergence or non-finite values.
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& what) : Error("divergence", what) {}
};

/// Fock-space occupation cutoff would contaminate the requested result.
struct TruncationError : Error {
  explicit TruncationError(const std::string& what) : Error("truncation", what) {}
};

}  // namespace kgs
