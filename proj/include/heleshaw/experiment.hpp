#ifndef HELESHAW_EXPERIMENT_HPP
#define HELESHAW_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "heleshaw/config.hpp"

namespace heleshaw {

struct ExperimentResult {
  int exit_code = 0;  // 0 ok, 1 violations, 2 solver failure
  std::vector<std::string> written_files;
  std::vector<std::string> summary;
};

// Runs the configured experiment and writes its outputs (time-series CSV,
// final snapshot, summary report) under cfg.output_dir.  Output bytes are
// deterministic for identical configs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes header + one row per record; columns are documented in the README
// and stable.  Per-functional first/second difference columns are filled
// when the series is uniformly sampled.  Throws on empty records.
void write_timeseries_csv(const std::vector<DiagnosticsRecord>& records,
                          const std::string& path);

// Plain-text node table (x [y] h) with a comment header carrying the config
// hash and grid metadata.
void write_snapshot(const Field& h, const std::string& config_hash,
                    const std::string& path);

}  // namespace heleshaw

#endif
