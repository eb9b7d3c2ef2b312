#pragma once

#include <string>
#include <vector>

namespace dyncausal {

/// Runs the command-line interface in-process. Returns the exit status:
/// 0 success, 1 usage or data error, 2 fit did not converge (output still
/// written).
int run_cli(std::vector<std::string> args);

}  // namespace dyncausal
