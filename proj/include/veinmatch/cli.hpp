#pragma once

#include <iosfwd>

namespace veinmatch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

const char* toolkit_version();

// Entry point of the `veinmatch` tool. Results go to `out`, diagnostics to
// `err`. Returns 0 on success, 1 on domain errors, 2 on usage errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace veinmatch
