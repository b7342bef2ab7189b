#pragma once

namespace omega_cli {

/// Entry point behind the omega-limit executable. Returns the process exit
/// status: 0 success, 2 config error, 3 numeric error, 4 I/O error.
int run(int argc, const char* const* argv);

}  // namespace omega_cli
