#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sedsep::cli {

// Entry point shared by the `sedsep` binary and the tests. Returns the
// process exit code; errors are reported on `err` as `error[CODE]: message`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Expands `--config file.json` into flags placed before the user's own flags
// so that explicit flags win. `known` lists the long option names (without
// dashes) accepted by the subcommand; other keys are rejected with BadConfig.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& known);

// SEDSEP_WORKERS if set, else the number of hardware threads.
std::size_t default_workers();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Rethrows the
// exception of the lowest failing index.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace sedsep::cli
