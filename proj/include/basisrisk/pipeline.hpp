#pragma once

#include <string>
#include <utility>
#include <vector>

#include "basisrisk/config.hpp"

namespace basisrisk {

// Result-file names inside the output directory.
namespace stage_file {
inline constexpr const char* panel = "panel.csv";
inline constexpr const char* fits = "fits.csv";
inline constexpr const char* simulated = "simulated.csv";
inline constexpr const char* county_stats = "county_stats.csv";
inline constexpr const char* field_evals = "field_evals.csv";
inline constexpr const char* county_aggregates = "county_aggregates.csv";
inline constexpr const char* reversal_rows = "reversal_rows.csv";
inline constexpr const char* reversal_grid = "reversal_grid.csv";
inline constexpr const char* reversal_corr = "reversal_corr.csv";
inline constexpr const char* sweep_results = "sweep_results.csv";
inline constexpr const char* sweep_summary = "sweep_summary.csv";
inline constexpr const char* manifest = "run_manifest.json";
}  // namespace stage_file

struct PipelineResult {
  std::string out_dir;
  std::vector<std::pair<std::string, std::string>> outputs;  // name -> sha256
};

// End-to-end: ingest/generate -> filter -> fit -> simulate -> evaluate ->
// aggregate -> report -> manifest. Every file is written to a temp name and
// renamed on success; a failing stage removes its partial outputs and
// resurfaces the error tagged with the stage name.
PipelineResult run_pipeline(const RunConfig& cfg);

// Stage entry points backing the CLI subcommands. Each consumes the files a
// prior stage left in cfg.out_dir (or the configured input) and persists its
// own outputs there.
void stage_generate(const RunConfig& cfg);
void stage_fit(const RunConfig& cfg);
void stage_simulate(const RunConfig& cfg);
void stage_evaluate(const RunConfig& cfg);
void stage_aggregate(const RunConfig& cfg);

struct SweepRow {
  int n_years = 0;
  std::string county_id;
  Crop crop = Crop::corn;
  int n_fields = 0;
  double share_ge_85 = 0.0;
  double share_ge_90 = 0.0;
};

struct SweepSummary {
  int n_years = 0;
  double avg_share_ge_85 = 0.0;
  double avg_share_ge_90 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summary;
};

// For each horizon length: AR(2)-extends every county base series,
// re-simulates the fields, re-evaluates and re-aggregates.
SweepResult run_sample_size_sweep(const RunConfig& cfg);

}  // namespace basisrisk
