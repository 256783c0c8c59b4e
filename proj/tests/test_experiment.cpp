#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <doctest.h>
#include <json.hpp>

#include "oranver/errors.hpp"
#include "oranver/experiment.hpp"

using namespace oranver;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() / ("oranver-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario small_preset() {
  auto sc = load_preset("paper-s5");
  sc.setup.settings.horizon = {Horizon::Kind::events, 8000.0};
  return sc;
}

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string l;
  while (std::getline(ss, l))
    out.push_back(l);
  return out;
}

} // namespace

TEST_CASE("never-update experiment serves version 0 only") {
  TempDir dir;
  ExperimentOptions opt;
  opt.out_dir = dir.path;
  opt.policies = std::vector{PolicyKind::never};
  opt.seeds = std::vector<std::uint64_t>{1};
  const auto report = run_experiment(small_preset(), opt);
  CHECK(report.failures.empty());
  REQUIRE(report.completed.size() == 1);
  const auto trace = lines(slurp(dir.path / "runs" / "never-seed1.trace.csv"));
  REQUIRE(trace.size() > 1);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    // version is the 8th column
    std::istringstream row(trace[i]);
    std::string f;
    for (int c = 0; c < 8; ++c)
      std::getline(row, f, ',');
    REQUIRE(f == "0");
  }
}

TEST_CASE("artifact set and overwrite protection") {
  TempDir dir;
  ExperimentOptions opt;
  opt.out_dir = dir.path;
  opt.policies = std::vector{PolicyKind::always, PolicyKind::q_learning};
  opt.seeds = std::vector<std::uint64_t>{1, 2};
  opt.parallel = 3;
  const auto report = run_experiment(small_preset(), opt);
  CHECK(report.completed.size() == 4);
  for (const char *stem : {"always-seed1", "always-seed2", "rl-seed1", "rl-seed2"}) {
    CHECK(fs::exists(dir.path / "runs" / (std::string(stem) + ".trace.csv")));
    CHECK(fs::exists(dir.path / "runs" / (std::string(stem) + ".decisions.csv")));
    CHECK(fs::exists(dir.path / "runs" / (std::string(stem) + ".stats.json")));
  }
  CHECK(fs::exists(dir.path / "runs" / "rl-seed1.qtable.txt"));
  CHECK_FALSE(fs::exists(dir.path / "runs" / "always-seed1.qtable.txt"));
  for (const char *f : {"manifest.json", "scenario.yaml", "summary.json", "boxplot.csv"})
    CHECK(fs::exists(dir.path / f));

  const auto summary = nlohmann::json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary["confidence_level"] == 0.98);
  CHECK(summary["policies"]["rl"]["runs"].size() == 2);
  CHECK(summary["policies"]["always"]["confidence_intervals"]["dApp"]["o2_mean_accuracy"]["n"] == 2);

  const auto box = lines(slurp(dir.path / "boxplot.csv"));
  CHECK(box.front() == kBoxplotHeader);
  CHECK(box.size() == 1 + 2 * 3);

  CHECK_THROWS_AS(run_experiment(small_preset(), opt), OutputExists);
  opt.overwrite = true;
  opt.policies = std::vector{PolicyKind::never};
  opt.seeds = std::vector<std::uint64_t>{1};
  run_experiment(small_preset(), opt);
  CHECK_FALSE(fs::exists(dir.path / "runs" / "rl-seed1.trace.csv"));
}

TEST_CASE("a manifest reproduces the experiment byte for byte") {
  TempDir first, second;
  ExperimentOptions opt;
  opt.out_dir = first.path;
  opt.seeds = std::vector<std::uint64_t>{3};
  opt.parallel = 2;
  run_experiment(small_preset(), opt);

  const auto sc = scenario_from_manifest(first.path / "manifest.json");
  ExperimentOptions again;
  again.out_dir = second.path;
  run_experiment(sc, again);

  std::size_t compared = 0;
  for (const auto &entry : fs::recursive_directory_iterator(first.path)) {
    if (!entry.is_regular_file())
      continue;
    const auto rel = fs::relative(entry.path(), first.path);
    REQUIRE(fs::exists(second.path / rel));
    CHECK_MESSAGE(slurp(entry.path()) == slurp(second.path / rel), rel.string());
    ++compared;
  }
  CHECK(compared == 4 + 5 * 3 + 1);
}

TEST_CASE("tampered manifests are refused") {
  TempDir dir;
  ExperimentOptions opt;
  opt.out_dir = dir.path;
  opt.policies = std::vector{PolicyKind::never};
  opt.seeds = std::vector<std::uint64_t>{1};
  run_experiment(small_preset(), opt);
  auto manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
  CHECK(manifest["seeds"] == nlohmann::json::array({1}));
  std::string yaml = manifest["scenario_yaml"];
  yaml.replace(yaml.find("threshold: 2"), 12, "threshold: 3");
  manifest["scenario_yaml"] = yaml;
  std::ofstream(dir.path / "manifest.json") << manifest.dump(2);
  CHECK_THROWS_AS(scenario_from_manifest(dir.path / "manifest.json"), ParseError);
}

TEST_CASE("summarize is repeatable and each run's summary is isolated") {
  TempDir one, two;
  ExperimentOptions opt;
  opt.policies = std::vector{PolicyKind::random};
  opt.out_dir = one.path;
  opt.seeds = std::vector<std::uint64_t>{5};
  run_experiment(small_preset(), opt);
  opt.out_dir = two.path;
  opt.seeds = std::vector<std::uint64_t>{5, 6};
  run_experiment(small_preset(), opt);

  const auto before = slurp(two.path / "summary.json");
  summarize(two.path);
  CHECK(slurp(two.path / "summary.json") == before);

  const auto a = nlohmann::json::parse(slurp(one.path / "summary.json"));
  const auto b = nlohmann::json::parse(before);
  CHECK(a["policies"]["random"]["runs"][0] == b["policies"]["random"]["runs"][0]);
  // A single replication has no interval.
  CHECK(a["policies"]["random"]["confidence_intervals"]["overall"]["o1_mean_delay_ms"].is_null());

  std::ostringstream plot;
  write_plot_data(two.path, plot);
  CHECK(plot.str() == slurp(two.path / "boxplot.csv"));
}

TEST_CASE("option overrides") {
  ExperimentOptions opt;
  opt.events = 1234;
  opt.curve_mode = CurveMode::percent_step;
  opt.policies = std::vector{PolicyKind::never};
  const auto sc = apply_options(load_preset("paper-s5"), opt);
  CHECK(sc.setup.settings.horizon.kind == Horizon::Kind::events);
  CHECK(sc.setup.settings.horizon.value == 1234.0);
  CHECK(sc.setup.settings.curves.mode == CurveMode::percent_step);
  CHECK(sc.policies == std::vector{PolicyKind::never});
  CHECK(run_stem({PolicyKind::load_based, 7}) == "load-based-seed7");
  CHECK(manifest_json(sc) == manifest_json(sc));
  CHECK(manifest_json(sc).find("1234") != std::string::npos);
}
