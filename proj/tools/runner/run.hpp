#pragma once

#include "runner/config.hpp"

#include <string>
#include <vector>

namespace symreeb::runner {

struct RunOutcome {
    int exit_code = 0;       // 0 ok, 2 validation/io, 3 numerical failure
    std::string stage;       // stage that failed, empty on success
    std::string message;
    std::vector<std::string> outputs;  // result files (relative to out_dir)
    json manifest;
};

/// Runs one task and writes results plus manifest.json into cfg.out_dir.
/// Never throws for validation or numerical errors; they are reported in the outcome.
RunOutcome run(RunConfig cfg, const std::vector<std::string>& command = {});

const char* library_version();

}  // namespace symreeb::runner
