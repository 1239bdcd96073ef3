#pragma once

#include <string>
#include <vector>

#include "aircomp/config.hpp"

namespace aircomp {

struct RunOutputs {
  std::vector<std::string> files;  // paths written, in emission order
};

// Executes the configured mode and writes its CSV files (and, for the
// distributed mode, the protocol message log) under config.output_dir.
// Solver failures are recorded in a status column of the affected row;
// exceptions escape only for configuration or I/O problems.  Output bytes
// are a pure function of (config, seed).
RunOutputs run(const RunConfig& config);

}  // namespace aircomp
