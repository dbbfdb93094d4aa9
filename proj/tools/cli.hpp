#pragma once

#include <ostream>

namespace pcup::cli {

/// Runs the `pcup` command line. Returns 0 on success, 2 on usage errors and
/// 1 on runtime errors (message on `err`).
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace pcup::cli
