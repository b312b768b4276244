// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>

namespace gi::cli {

/// Exit status: 0 success, 2 invalid input or configuration, 3 training
/// divergence, 1 anything else.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gi::cli
