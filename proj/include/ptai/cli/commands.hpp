#pragma once

#include <ostream>

#include "ptai/core/error.hpp"

namespace ptai::cli {

/// 0 success, 1 internal, 2 usage or configuration, 3 training collapse.
enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_usage = 2, exit_collapse = 3 };

int exit_code_for(ErrorKind kind) noexcept;

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ptai::cli
