#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace recsim {

/// Entry point of the `recsim` binary. Subcommands: simulate, replay-eval,
/// population, judge, serve, export. Returns the process exit code; usage errors
/// return 2, runtime errors 1.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace recsim
