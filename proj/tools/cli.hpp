#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vortex::cli {

enum ExitCode : int { kOk = 0, kUserError = 2, kNumericalError = 3 };

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> outputs;
  double wall_time = 0.0;
  std::string toolkit_version;
  std::string content_hash;
};

/// One input file contributing to the content hash.
struct HashedInput {
  std::string role;
  std::filesystem::path path;
};

/// SHA-256 over the byte contents of the inputs, each framed by its role and
/// length. Lowercase hex.
std::string content_hash(const std::vector<HashedInput>& inputs);

std::string sha256_hex(const std::string& bytes);

std::string manifest_json(const RunManifest& manifest);

/// Parses args (without the program name) and runs one subcommand. Results
/// go to the output directory; status lines to out; error JSON to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string toolkit_version();

}  // namespace vortex::cli
