#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ngnn {

/// Parses "3..10", "10,20,40" or mixes such as "1..3,8".
std::vector<int> parse_int_list(const std::string& text);

/// Runs one subcommand (wl, extract, forward, train, simulate, bench,
/// generate). args excludes the program name. Returns 0 on success, 2 on
/// usage errors, 1 on runtime errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ngnn
