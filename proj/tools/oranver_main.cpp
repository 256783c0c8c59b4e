#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oranver/errors.hpp"
#include "oranver/experiment.hpp"

using namespace oranver;
namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep))
    if (!item.empty())
      out.push_back(item);
  return out;
}

// "N" -> 1..N, "a:b" -> a..b, "a,b,c" -> that list.
std::vector<std::uint64_t> parse_seeds(const std::string &text) {
  auto number = [&](const std::string &s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != s.size() || s.empty())
      throw ParseError(fmt::format("bad seed '{}' in --seeds {}", s, text));
    return static_cast<std::uint64_t>(v);
  };
  std::vector<std::uint64_t> seeds;
  if (text.find(',') != std::string::npos) {
    for (const auto &s : split(text, ','))
      seeds.push_back(number(s));
  } else if (auto colon = text.find(':'); colon != std::string::npos) {
    const auto lo = number(text.substr(0, colon)), hi = number(text.substr(colon + 1));
    for (auto s = lo; s <= hi; ++s)
      seeds.push_back(s);
  } else {
    const auto n = number(text);
    for (std::uint64_t s = 1; s <= n; ++s)
      seeds.push_back(s);
  }
  if (seeds.empty())
    throw ParseError(fmt::format("--seeds {} selects no seed", text));
  return seeds;
}

struct Source {
  std::string scenario;
  std::string preset;
  std::string manifest;
};

std::string source_text(const Source &src, std::string &label) {
  if (!src.scenario.empty()) {
    label = src.scenario;
    return read_text(src.scenario);
  }
  label = fmt::format("preset:{}", src.preset.empty() ? "paper-s5" : src.preset);
  return preset_text(src.preset.empty() ? "paper-s5" : src.preset);
}

Scenario load_source(const Source &src) {
  if (!src.manifest.empty())
    return scenario_from_manifest(src.manifest);
  std::string label;
  const std::string text = source_text(src, label);
  return parse_scenario(text, label);
}

void add_source_options(CLI::App *cmd, Source &src, bool with_manifest) {
  auto *scenario = cmd->add_option("--scenario", src.scenario, "Scenario YAML file")->check(CLI::ExistingFile);
  auto *preset = cmd->add_option("--preset", src.preset, "Embedded scenario (default paper-s5)");
  preset->excludes(scenario);
  if (with_manifest) {
    auto *manifest =
        cmd->add_option("--manifest", src.manifest, "Reproduce the scenario recorded in a manifest.json")
            ->check(CLI::ExistingFile);
    manifest->excludes(scenario)->excludes(preset);
  }
}

std::string default_out_dir() {
  if (const char *env = std::getenv("ORANVER_OUT_DIR"); env && *env)
    return env;
  return "oranver-out";
}

int cmd_run(const Source &src, const ExperimentOptions &options) {
  const Scenario scenario = load_source(src);
  const auto runs = (options.policies ? options.policies->size() : scenario.policies.size()) *
                    (options.seeds ? options.seeds->size() : scenario.seeds.size());
  std::cerr << fmt::format("running {} run(s) into {}\n", runs, options.out_dir.string());
  const auto report = run_experiment(scenario, options);
  for (const auto &key : report.completed)
    std::cerr << fmt::format("ok     {}\n", run_stem(key));
  for (const auto &f : report.failures)
    std::cerr << fmt::format("FAILED {}: {}\n", run_stem(f.key), f.message);
  if (!report.failures.empty()) {
    std::cerr << fmt::format("{} of {} run(s) failed; summary not written\n", report.failures.size(),
                             report.failures.size() + report.completed.size());
    return 1;
  }
  std::cerr << fmt::format("wrote {}\n", (options.out_dir / "summary.json").string());
  return 0;
}

int cmd_validate(const Source &src) {
  std::string label;
  const std::string text = source_text(src, label);
  const auto diags = validate_scenario(text);
  bool failed = false;
  for (const auto &d : diags) {
    std::cout << d.format(label) << "\n";
    failed = failed || d.severity == Diagnostic::Severity::error;
  }
  if (!failed)
    std::cout << fmt::format("{}: ok\n", label);
  return failed ? 1 : 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Discrete-event simulator for ML model version updates in a multi-layer O-RAN deployment"};
  app.set_version_flag("--version", ORANVER_VERSION);
  app.require_subcommand(1);

  Source src;
  ExperimentOptions options;
  std::string out_dir = default_out_dir();
  std::string policies, seeds, curve_mode, plot_target = "-";
  std::uint64_t events = 0;
  std::string show_name = "paper-s5";

  auto *run = app.add_subcommand("run", "Run every (policy, seed) pair of a scenario");
  add_source_options(run, src, true);
  run->add_option("--policies", policies, "Comma list of always,never,random,load-based,rl");
  run->add_option("--seeds", seeds, "N (seeds 1..N), a:b (inclusive range) or a comma list");
  run->add_option("--events", events, "Event horizon per run")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (default $ORANVER_OUT_DIR or ./oranver-out)");
  run->add_option("--parallel", options.parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_flag("--overwrite", options.overwrite, "Replace the contents of a non-empty output directory");
  run->add_option("--curve-mode", curve_mode, "Attribute curves")
      ->check(CLI::IsMember({"geometric", "percent-step"}));

  auto *validate = app.add_subcommand("validate", "Check a scenario and print diagnostics");
  add_source_options(validate, src, false);

  auto *summ = app.add_subcommand("summarize", "Re-aggregate existing traces into summary.json and boxplot.csv");
  summ->add_option("--out", out_dir, "Experiment directory");

  auto *plot = app.add_subcommand("plot-data", "Emit the boxplot CSV of an experiment directory");
  plot->add_option("--out", out_dir, "Experiment directory");
  plot->add_option("--output", plot_target, "CSV destination ('-' for stdout)");

  auto *show = app.add_subcommand("show-preset", "Print an embedded scenario as YAML");
  show->add_option("name", show_name, "Preset name")->check(CLI::IsMember(preset_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    options.out_dir = out_dir;
    if (*run) {
      if (!policies.empty()) {
        std::vector<PolicyKind> kinds;
        for (const auto &p : split(policies, ','))
          kinds.push_back(policy_kind_from_string(p));
        options.policies = kinds;
      }
      if (!seeds.empty())
        options.seeds = parse_seeds(seeds);
      if (events > 0)
        options.events = events;
      if (!curve_mode.empty())
        options.curve_mode = curve_mode_from_string(curve_mode);
      return cmd_run(src, options);
    }
    if (*validate)
      return cmd_validate(src);
    if (*summ) {
      summarize(options.out_dir);
      std::cerr << fmt::format("wrote {}\n", (options.out_dir / "summary.json").string());
      return 0;
    }
    if (*plot) {
      if (plot_target == "-") {
        write_plot_data(options.out_dir, std::cout);
      } else {
        std::ofstream out(plot_target, std::ios::binary | std::ios::trunc);
        if (!out)
          throw Error(fmt::format("cannot write {}", plot_target));
        write_plot_data(options.out_dir, out);
      }
      return 0;
    }
    if (*show) {
      std::cout << preset_text(show_name);
      return 0;
    }
  } catch (const InvalidScenario &e) {
    std::cerr << "invalid scenario:\n" << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
