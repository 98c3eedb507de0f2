/// Batch runner behind the hall-lab command line tool.
///
/// Every command returns a table whose first line is a schema comment
/// `# hall-lab schema=1 command=<name>` followed by the CSV header. Doubles
/// use 17 significant digits; missing values are written as `nan`.
#pragma once

#include <string>
#include <vector>

#include "hall_lab/config.hpp"

namespace hall {

inline constexpr int kSchemaVersion = 1;

/// Alarm thresholds.
inline constexpr double kImagResidualAlarm = 1e-8;
inline constexpr double kFullTraceAlarm = 1e-8;
inline constexpr double kWindowDeltaAlarm = 0.02;

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitAlarm = 3 };

struct CsvTable {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string render() const;
};

struct RunOutcome {
    CsvTable table;
    std::vector<std::string> alarms;
};

RunOutcome run_bulk(const ExperimentConfig& cfg, int threads);
RunOutcome run_edge(const ExperimentConfig& cfg, int threads);
RunOutcome run_topology(const ExperimentConfig& cfg, int threads);
RunOutcome run_harper(const ExperimentConfig& cfg, int threads);
RunOutcome run_diagnose(const ExperimentConfig& cfg, int threads);

/// Dispatches on cfg.command.
RunOutcome run_command(const ExperimentConfig& cfg, int threads);

struct WrittenFiles {
    std::string csv;
    std::string manifest;
};

/// Writes <dir>/<name>.csv and <dir>/<name>.manifest.json.
WrittenFiles write_outputs(const ExperimentConfig& cfg, const RunOutcome& outcome, const std::string& dir,
                           double wall_seconds, int threads);

/// Full command-line entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace hall
