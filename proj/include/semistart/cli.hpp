#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semistart::cli {

//! Runs one command line (without the program name).
//! Returns 0 on success, 2 on usage errors and 1 on numeric errors.
int
run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace semistart::cli
