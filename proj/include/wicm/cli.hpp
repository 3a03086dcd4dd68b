#pragma once

#include "wicm/error.hpp"
#include "wicm/sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace wicm::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kInputError = 2, kNumericalError = 3, kConfigError = 4 };

int exit_code_for(ErrorKind kind) noexcept;

/// Parses a simulation config (JSON text). Throws ConfigInvalid naming the
/// offending field.
sim::SimStudyConfig parse_study_config(const std::string& json_text);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

/// Entry point; `args[0]` is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wicm::cli
