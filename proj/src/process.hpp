#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace blamestyle::detail {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs `argv` (argv[0] looked up on PATH) in `cwd`, capturing both streams.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd);

}  // namespace blamestyle::detail
