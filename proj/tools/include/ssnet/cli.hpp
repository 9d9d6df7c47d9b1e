#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssnet::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;

// `args` excludes the program name. Artifacts without an output path go to
// `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace ssnet::cli
