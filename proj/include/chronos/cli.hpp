#pragma once

#include <iostream>

namespace chronos {

/// Entry point of the `chronos` command-line tool. Returns the process exit
/// status: 0 on success, 1 on bad input, 2 when the solver did not converge.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace chronos
