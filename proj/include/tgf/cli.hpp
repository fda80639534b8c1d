#pragma once

#include <iostream>

namespace tgf {

/// Entry point of the `tgforge` command line tool. Returns 0 on success, 1 for
/// domain errors and 2 for usage errors; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace tgf
