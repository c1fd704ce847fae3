// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace faukit::cli {

enum class ExitCode : int {
    ok = 0,
    usage = 1,    // bad flags, unknown subcommand or config key
    data = 2,     // missing/malformed files, inconsistent data or config
    numeric = 3,  // non-finite values during training or inference
};

/// Maps an in-flight exception onto the exit-code contract.
ExitCode classify(const std::exception& e) noexcept;

/// Runs one faukit command. `args` excludes the program name. Reports go to
/// `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace faukit::cli
