#pragma once

// Shared basic types and error taxonomy for the tfm library.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tfm {

using Index = std::int64_t;

// Hard cap on tensor order.  Keeps multi-index buffers bounded (also in the
// C API) and matches the scope of the library: low-order dense tensors.
inline constexpr Index kMaxOrder = 8;

// Root of the library's exception hierarchy.  Everything thrown on purpose
// derives from Error; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A scalar or enum argument is out of its documented domain.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// Shapes of two objects that must agree do not.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

// A moment matrix carries no usable signal (all singular values below the
// degeneracy floor), so no direction can be estimated from it.
class DegenerateMoment : public Error {
 public:
  explicit DegenerateMoment(const std::string& what) : Error(what) {}
};

// File or stream I/O failed, or a container file is malformed.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// Singular values at or below this floor count as numerically zero when a
// moment matrix is tested for degeneracy.
inline constexpr double kDegeneracyFloor = 1e-14;

}  // namespace tfm
