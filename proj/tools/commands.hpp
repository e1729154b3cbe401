#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cthp::tool {

// Stable exit-code contract for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitDivergence = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses argv (without the program name) and runs the selected subcommand.
/// Throws the error types above; main() maps them to exit codes.
int run(const std::vector<std::string>& args);

}  // namespace cthp::tool
