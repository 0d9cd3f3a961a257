#pragma once

// Command-line front door. Exposed as a function so tests can drive the
// CLI in-process.
//
// Exit codes: 0 success, 1 usage error, 2 format/parse error,
// 3 crypto failure, 4 I/O error.

namespace esncrypt {

int run_cli(int argc, const char* const* argv);

}  // namespace esncrypt
