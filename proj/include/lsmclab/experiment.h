#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsmclab/metrics.h"
#include "lsmclab/options.h"
#include "lsmclab/status.h"
#include "lsmclab/strategy.h"
#include "lsmclab/workload.h"

namespace lsmclab {

struct ExperimentConfig {
  TreeConfig tree;
  PresetOptions preset_opts;
  // D_th as a percentage of the workload's operation count; resolved per run.
  std::optional<double> delete_persistence_pct;

  // Preset grid; empty means the explicit ensemble in strategy_settings.
  std::vector<std::string> strategies;
  std::map<std::string, std::string> strategy_settings;

  WorkloadSpec workload;
  std::string workload_file;

  std::string output_dir = "lsmclab-out";
  int repetitions = 1;
  bool parallel = false;
  // Check every lookup and scan against an ordered-map oracle.
  bool verify = false;
};

// Flat ini text: [engine], [strategy], [workload], [experiment] sections.
StatusOr<ExperimentConfig> ParseConfig(std::string_view text);
StatusOr<ExperimentConfig> LoadConfigFile(const std::string& path);

// Strategies of the grid, with D_th filled in from the op count when given
// as a percentage.
StatusOr<std::vector<CompactionStrategy>> ResolveStrategies(const ExperimentConfig& cfg, uint64_t op_count);

struct RunResult {
  std::string strategy;
  std::string ensemble;
  uint64_t seed = 0;
  WorkloadSpec spec;
  uint64_t workload_hash = 0;
  uint64_t operations = 0;
  uint64_t inserts = 0;
  uint64_t updates = 0;
  uint64_t deletes = 0;
  MetricsReport report;
  std::string manifest_dump;
};

// Number of operations the configured workload will issue.
StatusOr<uint64_t> WorkloadOpCount(const ExperimentConfig& cfg);

// One repetition against a fresh in-memory device.
StatusOr<RunResult> RunOnce(const ExperimentConfig& cfg, const CompactionStrategy& strategy, uint64_t seed);

// Every strategy of the grid times every repetition, in grid order.
StatusOr<std::vector<RunResult>> RunGrid(const ExperimentConfig& cfg);

inline constexpr int kCsvVersion = 1;
std::string CsvHeader();
std::string CsvRow(const RunResult& r);
std::string ReportJson(const std::vector<RunResult>& runs);

// metrics.csv, report.json and manifest-dump.txt under dir.
Status WriteOutputs(const std::string& dir, const std::vector<RunResult>& runs);

struct CompareEntry {
  std::string label;
  uint64_t workload_hash = 0;
  std::map<std::string, double> metrics;
};

// Runs of one or more report.json documents.
StatusOr<std::vector<CompareEntry>> LoadCompareEntries(const std::vector<std::string>& json_docs);

// Metrics ranked by compare; lower is better for all of them.
const std::vector<std::string>& CompareMetrics();

struct Ranking {
  std::string metric;
  // label -> 1-based rank; equal values share a rank.
  std::map<std::string, int> rank;
};

struct CompareResult {
  std::vector<Ranking> rankings;
  // dominated label -> a label that dominates it.
  std::map<std::string, std::string> dominated;
  std::string table;
};

StatusOr<CompareResult> Compare(const std::vector<CompareEntry>& entries);

}  // namespace lsmclab
