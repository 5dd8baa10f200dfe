#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "config.h"
#include "ej/error.h"

namespace ej::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitRemote = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

// Full command line without the program name, e.g. {"--config", "c.json", "optimize"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct LoadedDataset {
  const DatasetConfig* config = nullptr;
  OrchestrationInput input;
};

// Series, fold schedule and bundle for one dataset; DataError on anything missing.
LoadedDataset load_dataset(const RunConfig& config, const DatasetConfig& ds);

std::unique_ptr<Judge> make_judge(const JudgeBackendConfig& config);

}  // namespace ej::cli
