#pragma once

#include <stdexcept>
#include <string>

namespace lrex {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration is outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is not defined in this regime of alpha (e.g. the
/// mean of a kernel with alpha <= 1).
class InvalidRegime : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not meet its error target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Series recorded on different meshes were combined.
class MeshMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}
}  // namespace detail

}  // namespace lrex
