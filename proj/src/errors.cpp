// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/errors.hpp"

namespace gi {

Error::Error(const char* kind, const std::string& what)
    : std::runtime_error(std::string(kind) + ": " + what), kind_(kind) {}

}  // namespace gi
