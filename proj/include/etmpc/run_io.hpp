#pragma once

#include <string>

#include "etmpc/closed_loop.hpp"
#include "etmpc/config.hpp"

namespace etmpc {

// Writes trajectory.csv, iterations.csv, and manifest.json under dir
// (created if missing). CSVs contain only seed-deterministic columns; wall
// times live in the manifest.
void write_run_artifacts(const std::string& dir, const RunConfig& config,
                         const RunSummary& summary);

}  // namespace etmpc
