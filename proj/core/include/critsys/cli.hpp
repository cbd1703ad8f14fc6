#pragma once

#include <string>
#include <vector>

// Batch front end: command dispatch, key=value config handling, JSON
// report and CSV emission. Exit contract: 0 all requested checks pass,
// 1 numeric failure, 2 configuration failure.

namespace critsys {

struct cli_result {
  int exit_code = 0;
  std::string report;  // text written to stdout (JSON report or defaults listing)
  std::string csv;     // CSV payload for commands that produce one
  std::string error;   // diagnostics written to stderr
};

// process entry point; writes report/CSV files under --out when given
int run_cli(int argc, const char* const* argv);

// in-process variant for tests; captures all emitted artifacts
cli_result run_cli_capture(const std::vector<std::string>& args);

}  // namespace critsys
