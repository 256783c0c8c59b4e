#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oranver/scenario.hpp"

namespace oranver {

struct ExperimentOptions {
  std::filesystem::path out_dir = "oranver-out";
  std::optional<std::vector<PolicyKind>> policies;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::uint64_t> events;
  std::optional<CurveMode> curve_mode;
  unsigned parallel = 1;
  bool overwrite = false;
};

struct RunKey {
  PolicyKind policy = PolicyKind::never;
  std::uint64_t seed = 0;
};

struct RunFailure {
  RunKey key;
  std::string message;
};

struct ExperimentReport {
  Scenario scenario; // after command-line overrides
  std::vector<RunKey> completed;
  std::vector<RunFailure> failures;
};

// Scenario with the option overrides applied.
Scenario apply_options(Scenario scenario, const ExperimentOptions &options);

// "<policy>-seed<k>"
std::string run_stem(const RunKey &key);

// Runs every (policy, seed) pair of the effective scenario on a pool of
// `parallel` threads and writes, under out_dir:
//   manifest.json, scenario.yaml,
//   runs/<stem>.trace.csv, runs/<stem>.decisions.csv, runs/<stem>.stats.json,
//   runs/<stem>.qtable.txt (rl only),
//   summary.json and boxplot.csv (once every run succeeded).
// Throws OutputExists when out_dir is non-empty and overwrite is off.
ExperimentReport run_experiment(const Scenario &scenario, const ExperimentOptions &options);

// Manifest content; contains no timestamps or host details.
std::string manifest_json(const Scenario &scenario);
// Scenario recorded in a manifest; throws ParseError on hash mismatch.
Scenario scenario_from_manifest(const std::filesystem::path &manifest);

// Re-aggregates existing run files into summary.json and boxplot.csv.
void summarize(const std::filesystem::path &out_dir);
// Writes only the boxplot CSV.
void write_plot_data(const std::filesystem::path &out_dir, std::ostream &out);

// Boxplot CSV columns, in order:
//   policy, app_class, metric, n, min, whisker_low, q1, median, q3,
//   whisker_high, max, outliers, mean, stddev
extern const char *const kBoxplotHeader;

} // namespace oranver
