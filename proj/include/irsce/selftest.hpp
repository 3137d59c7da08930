#pragma once

#include <iosfwd>

namespace irsce {

/// Quick invariant checks over every module on a few fixed seeds. Prints one
/// line per check and returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace irsce
