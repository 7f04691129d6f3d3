#pragma once

#include <iosfwd>

namespace rhyme {

// Exit codes returned by dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // bad arguments, bad input files
inline constexpr int kExitRuntime = 2;     // failures while running

// Entry point behind the `rhyme` executable. Subcommands: ingest, train,
// tag, iaa, agreement-data, regress, sweep, llm, serve.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rhyme
