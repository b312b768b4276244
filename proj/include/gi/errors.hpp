// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gi {

/// Root of every error raised by the library. `kind()` names the failure
/// class so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what);
  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define GI_DECLARE_ERROR(Name)                                  \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

GI_DECLARE_ERROR(InvalidData)
GI_DECLARE_ERROR(DegenerateSubspace)
GI_DECLARE_ERROR(ShapeMismatch)
GI_DECLARE_ERROR(SingularCovariance)
GI_DECLARE_ERROR(LayerSetMismatch)
GI_DECLARE_ERROR(ShapeError)
GI_DECLARE_ERROR(UnknownDomain)
GI_DECLARE_ERROR(UnknownLayer)
GI_DECLARE_ERROR(ContractViolation)
GI_DECLARE_ERROR(ConfigError)
GI_DECLARE_ERROR(FormatError)
GI_DECLARE_ERROR(IoError)
GI_DECLARE_ERROR(DegenerateStats)

#undef GI_DECLARE_ERROR

/// Raised when training produces a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error("DivergenceError", what) {}
};

}  // namespace gi
