#pragma once

#include <string>
#include <vector>

namespace echosim {

/// Entry point behind the `echosim` binary. Subcommands: simulate, scan,
/// predict, bloch. Returns 0 on success, 1 on validation/usage errors,
/// 2 on runtime failures.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace echosim
