#ifndef DRFH_CLI_HPP
#define DRFH_CLI_HPP

namespace drfh {

/// Command-line entry point. Subcommands: solve, simulate, audit, gen-cluster,
/// gen-trace, compare. Returns the process exit status: 0 success, 1 failed
/// audit, 2 usage or input error.
int dispatch(int argc, const char* const* argv);

}  // namespace drfh

#endif  // DRFH_CLI_HPP
