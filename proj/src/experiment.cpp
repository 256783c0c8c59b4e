#include "oranver/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "oranver/errors.hpp"
#include "oranver/metrics.hpp"
#include "oranver/rng.hpp"
#include "oranver/trace_io.hpp"

namespace oranver {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char *const kBoxplotHeader =
    "policy,app_class,metric,n,min,whisker_low,q1,median,q3,whisker_high,max,outliers,mean,stddev";

namespace {

std::ofstream open_out(const fs::path &p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(fmt::format("cannot write {}", p.string()));
  return out;
}

std::ifstream open_in(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error(fmt::format("cannot read {}", p.string()));
  return in;
}

std::string read_file(const fs::path &p) {
  auto in = open_in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json stats_json(const RunStats &s) {
  return json{{"events", s.events},
              {"request_events", s.request_events},
              {"arrivals", s.arrivals},
              {"completions", s.completions},
              {"in_service_at_end", s.in_service_at_end},
              {"queued_at_end", s.queued_at_end},
              {"spawns", s.spawns},
              {"removals", s.removals},
              {"updates", s.updates},
              {"forced_keeps", s.forced_keeps},
              {"releases", s.releases},
              {"learning_steps", s.learning_steps},
              {"capacity_violations", s.capacity_violations},
              {"conservation_violations", s.conservation_violations},
              {"time_regressions", s.time_regressions},
              {"end_time_ms", s.end_time_ms},
              {"max_replicas", s.max_replicas}};
}

json means_json(const ObjectiveMeans &m) {
  return json{{"o1_mean_delay_ms", m.mean_delay_ms},
              {"o2_mean_accuracy", m.mean_accuracy},
              {"o3_mean_stability", m.mean_stability},
              {"requests", m.requests}};
}

json dist_json(const DistributionStats &d) {
  return json{{"n", d.n},         {"min", d.min},
              {"whisker_low", d.whisker_low}, {"q1", d.q1},
              {"median", d.median}, {"q3", d.q3},
              {"whisker_high", d.whisker_high}, {"max", d.max},
              {"outliers", d.outliers}, {"mean", d.mean},
              {"stddev", d.stddev}};
}

json ci_json(const ConfidenceInterval &ci) {
  return json{{"mean", ci.mean},       {"half_width", ci.half_width}, {"lower", ci.lower()},
              {"upper", ci.upper()}, {"level", ci.level},           {"n", ci.n}};
}

void prepare_out_dir(const fs::path &dir, bool overwrite) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw OutputExists(fmt::format("{} exists and is not a directory", dir.string()));
    if (!fs::is_empty(dir)) {
      if (!overwrite)
        throw OutputExists(fmt::format("{} is not empty (pass --overwrite to replace its contents)", dir.string()));
      fs::remove_all(dir / "runs");
      for (const char *f : {"manifest.json", "scenario.yaml", "summary.json", "boxplot.csv"})
        fs::remove(dir / f);
    }
  }
  fs::create_directories(dir / "runs");
}

void execute_run(const Scenario &sc, const RunKey &key, const fs::path &runs) {
  const auto &setup = sc.setup;
  auto policy = make_policy(key.policy, setup.settings.policy, key.seed);
  Simulation sim(setup, *policy, key.seed);
  RunResult result = sim.run();
  const auto names = TraceNames::from(setup);
  const std::string stem = run_stem(key);
  {
    auto out = open_out(runs / (stem + ".trace.csv"));
    write_trace(out, result.trace, names, setup.settings.curves.scheme);
  }
  {
    auto out = open_out(runs / (stem + ".decisions.csv"));
    write_decision_log(out, result.log, names);
  }
  {
    auto out = open_out(runs / (stem + ".stats.json"));
    json j{{"policy", std::string(to_string(key.policy))}, {"seed", key.seed}, {"stats", stats_json(result.stats)}};
    out << j.dump(2) << "\n";
  }
  if (auto *agent = dynamic_cast<const QLearningAgent *>(policy.get())) {
    auto out = open_out(runs / (stem + ".qtable.txt"));
    agent->table().save(out, sim.encoder());
  }
}

struct PolicyAggregate {
  json runs = json::array();
  std::vector<ObjectiveSummary> summaries;
  std::array<std::optional<DistributionStats>, 3> delay;
};

struct Aggregate {
  Scenario scenario;
  std::vector<std::pair<PolicyKind, PolicyAggregate>> policies;
};

// Every CI block: overall, model-averaged, then per app class with data.
json ci_block(const std::vector<ObjectiveSummary> &s, double level) {
  auto interval = [&](auto pick) -> json {
    std::vector<double> v;
    for (const auto &x : s)
      v.push_back(pick(x));
    if (v.size() < 2)
      return nullptr;
    return ci_json(confidence_interval(v, level));
  };
  auto triple = [&](auto select) {
    return json{{"o1_mean_delay_ms", interval([&](const ObjectiveSummary &x) { return select(x).mean_delay_ms; })},
                {"o2_mean_accuracy", interval([&](const ObjectiveSummary &x) { return select(x).mean_accuracy; })},
                {"o3_mean_stability", interval([&](const ObjectiveSummary &x) { return select(x).mean_stability; })}};
  };
  json out;
  out["overall"] = triple([](const ObjectiveSummary &x) -> const ObjectiveMeans & { return x.overall; });
  out["model_averaged"] = triple([](const ObjectiveSummary &x) -> const ObjectiveMeans & { return x.model_averaged; });
  for (int c = 0; c < 3; ++c) {
    const bool present = std::all_of(s.begin(), s.end(), [&](const ObjectiveSummary &x) {
      return x.per_app_class[c].requests > 0;
    });
    if (present && !s.empty())
      out[std::string(to_string(static_cast<AppClass>(c)))] =
          triple([c](const ObjectiveSummary &x) -> const ObjectiveMeans & { return x.per_app_class[c]; });
  }
  return out;
}

Aggregate aggregate(const fs::path &dir) {
  Aggregate agg;
  agg.scenario = scenario_from_manifest(dir / "manifest.json");
  const auto &sc = agg.scenario;
  const auto names = TraceNames::from(sc.setup);
  for (auto kind : sc.policies) {
    PolicyAggregate pa;
    std::array<std::vector<double>, 3> delays;
    for (auto seed : sc.seeds) {
      const RunKey key{kind, seed};
      const std::string stem = run_stem(key);
      ObjectiveAccumulator acc(names.app_classes);
      auto in = open_in(dir / "runs" / (stem + ".trace.csv"));
      read_trace(in, names, [&](const RequestRecord &r) {
        acc.add(r);
        delays[static_cast<int>(names.app_classes[r.model])].push_back(r.total);
      });
      ObjectiveSummary summary;
      try {
        summary = acc.finish();
      } catch (const EmptyTrace &) {
        pa.runs.push_back(json{{"seed", seed}, {"overall", nullptr}});
        continue;
      }
      json run{{"seed", seed}, {"overall", means_json(summary.overall)},
               {"model_averaged", means_json(summary.model_averaged)}};
      json per_class = json::object();
      for (int c = 0; c < 3; ++c)
        if (summary.per_app_class[c].requests > 0)
          per_class[std::string(to_string(static_cast<AppClass>(c)))] = means_json(summary.per_app_class[c]);
      run["per_app_class"] = per_class;
      json per_model = json::object();
      for (std::size_t k = 0; k < summary.per_model.size(); ++k)
        if (summary.per_model[k].requests > 0)
          per_model[names.models[k]] = means_json(summary.per_model[k]);
      run["per_model"] = per_model;
      const fs::path stats = dir / "runs" / (stem + ".stats.json");
      if (fs::exists(stats))
        run["stats"] = json::parse(read_file(stats))["stats"];
      pa.runs.push_back(std::move(run));
      pa.summaries.push_back(summary);
    }
    // One policy's delays at a time keeps memory bounded by a single policy.
    for (int c = 0; c < 3; ++c)
      if (!delays[c].empty())
        pa.delay[c] = boxplot(std::move(delays[c]));
    agg.policies.emplace_back(kind, std::move(pa));
  }
  return agg;
}

std::string boxplot_csv(const Aggregate &agg, json *summary) {
  std::string csv = std::string(kBoxplotHeader) + "\n";
  for (const auto &[kind, pa] : agg.policies) {
    json delay = json::object();
    for (int c = 0; c < 3; ++c) {
      if (!pa.delay[c])
        continue;
      const auto cls = std::string(to_string(static_cast<AppClass>(c)));
      const DistributionStats &d = *pa.delay[c];
      csv += fmt::format("{},{},delay_ms,{},{},{},{},{},{},{},{},{},{},{}\n", to_string(kind), cls, d.n, d.min,
                         d.whisker_low, d.q1, d.median, d.q3, d.whisker_high, d.max, d.outliers, d.mean, d.stddev);
      delay[cls] = dist_json(d);
    }
    if (summary)
      (*summary)["policies"][std::string(to_string(kind))]["delay_ms"] = delay;
  }
  return csv;
}

} // namespace

std::string run_stem(const RunKey &key) { return fmt::format("{}-seed{}", to_string(key.policy), key.seed); }

Scenario apply_options(Scenario sc, const ExperimentOptions &o) {
  if (o.policies)
    sc.policies = *o.policies;
  if (o.seeds)
    sc.seeds = *o.seeds;
  if (o.events)
    sc.setup.settings.horizon = {Horizon::Kind::events, static_cast<double>(*o.events)};
  if (o.curve_mode)
    sc.setup.settings.curves.mode = *o.curve_mode;
  if (sc.policies.empty())
    throw InvalidScenario("no policies selected");
  if (sc.seeds.empty())
    throw InvalidScenario("no seeds selected");
  return sc;
}

std::string manifest_json(const Scenario &sc) {
  const std::string yaml = dump_scenario(sc);
  json policies = json::array();
  for (auto k : sc.policies)
    policies.push_back(std::string(to_string(k)));
  const auto &h = sc.setup.settings.horizon;
  json j{{"tool", "oranver"},
         {"code_version", ORANVER_VERSION},
         {"scenario_name", sc.name},
         {"scenario_hash", fmt::format("fnv1a64:{:016x}", fnv1a64(yaml))},
         {"policies", policies},
         {"seeds", sc.seeds},
         {"horizon", {{"kind", h.kind == Horizon::Kind::events ? "events" : "time_ms"}, {"value", h.value}}},
         {"scenario_yaml", yaml}};
  return j.dump(2) + "\n";
}

Scenario scenario_from_manifest(const fs::path &manifest) {
  json j;
  try {
    j = json::parse(read_file(manifest));
  } catch (const json::exception &e) {
    throw ParseError(fmt::format("{}: {}", manifest.string(), e.what()));
  }
  if (!j.contains("scenario_yaml") || !j["scenario_yaml"].is_string())
    throw ParseError(fmt::format("{}: missing scenario_yaml", manifest.string()));
  const auto yaml = j["scenario_yaml"].get<std::string>();
  const auto expected = fmt::format("fnv1a64:{:016x}", fnv1a64(yaml));
  if (j.value("scenario_hash", std::string()) != expected)
    throw ParseError(fmt::format("{}: scenario hash mismatch", manifest.string()));
  return parse_scenario(yaml, manifest.string());
}

ExperimentReport run_experiment(const Scenario &scenario, const ExperimentOptions &options) {
  ExperimentReport report;
  report.scenario = apply_options(scenario, options);
  const Scenario &sc = report.scenario;
  for (const auto &problem : validate_setup(sc.setup))
    throw InvalidScenario(problem);

  prepare_out_dir(options.out_dir, options.overwrite);
  {
    auto out = open_out(options.out_dir / "manifest.json");
    out << manifest_json(sc);
    auto yaml = open_out(options.out_dir / "scenario.yaml");
    yaml << dump_scenario(sc);
  }

  std::vector<RunKey> keys;
  for (auto k : sc.policies)
    for (auto s : sc.seeds)
      keys.push_back({k, s});

  std::vector<std::optional<std::string>> errors(keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < keys.size();) {
      try {
        execute_run(sc, keys[i], options.out_dir / "runs");
      } catch (const std::exception &e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.parallel, static_cast<unsigned>(keys.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (errors[i])
      report.failures.push_back({keys[i], *errors[i]});
    else
      report.completed.push_back(keys[i]);
  }
  if (report.failures.empty())
    summarize(options.out_dir);
  return report;
}

void summarize(const fs::path &dir) {
  Aggregate agg = aggregate(dir);
  const double level = 0.98;
  json summary{{"scenario_name", agg.scenario.name}, {"confidence_level", level}, {"policies", json::object()}};
  for (auto &[kind, pa] : agg.policies) {
    auto &p = summary["policies"][std::string(to_string(kind))];
    p["runs"] = pa.runs;
    p["confidence_intervals"] = ci_block(pa.summaries, level);
  }
  const std::string csv = boxplot_csv(agg, &summary);
  {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << "\n";
  }
  auto out = open_out(dir / "boxplot.csv");
  out << csv;
}

void write_plot_data(const fs::path &dir, std::ostream &out) { out << boxplot_csv(aggregate(dir), nullptr); }

} // namespace oranver
