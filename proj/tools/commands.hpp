#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpdhnf::cli {

// Exit codes: 0 success, 1 usage, 2 pipeline or I/O error, 3 inconclusive certificate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpdhnf::cli
