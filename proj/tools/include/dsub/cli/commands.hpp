#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "dsub/cli/config.hpp"
#include "dsub/cli/ingest.hpp"

namespace dsub::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_other = 1,
  exit_usage = 2,
  exit_input = 3,
  exit_numerical = 4,
};

/// Maps an in-flight exception to its exit class.
int exit_code_for(const std::exception& e);

Json to_json(const IngestSpec& spec);
IngestSpec ingest_spec(const Json& j);

struct CommandOutcome {
  Json manifest;
  /// False when any record of a batch failed.
  bool batch_ok = true;
};

/// Runs a fully resolved command spec ({"command": ..., ...}), writing its
/// artifacts and manifest.json into out_dir.
CommandOutcome run_command(const Json& spec, const std::filesystem::path& out_dir);

struct ReplayOutcome {
  bool identical = true;
  std::vector<std::string> mismatched;
  CommandOutcome run;
};

/// Re-runs the spec recorded in a manifest into out_dir and compares every
/// artifact checksum. Inputs whose checksum changed are an IngestError.
ReplayOutcome replay(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& out_dir);

}  // namespace dsub::cli
