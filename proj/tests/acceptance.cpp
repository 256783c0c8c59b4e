// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [--strict]
//
// Exits 0 once every criterion was evaluated, whatever the verdicts, so the
// report always reaches the test log; --strict exits 1 when any criterion
// fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "oranver/experiment.hpp"
#include "oranver/metrics.hpp"
#include "oranver/trace_io.hpp"

using namespace oranver;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Tolerances.
constexpr double kMm1RelTol = 0.05;
constexpr std::size_t kMm1MinRequests = 200000;
constexpr double kEpsilonTol = 1e-6;
constexpr double kEndpointRelTol = 1e-9;
constexpr std::size_t kRewardSamples = 10000;
constexpr double kDappBandLow = 10.0 / 2.0, kDappBandHigh = 12.0 * 2.0;
constexpr std::uint64_t kPresetEvents = 1000000;
constexpr int kSeeds = 10;

struct Verdict {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, std::string name, bool pass, std::string detail) {
  std::cout << fmt::format("[{}] {:>2} {}: {}\n", pass ? "PASS" : "FAIL", id, name, detail) << std::flush;
  verdicts.push_back({id, std::move(name), pass, std::move(detail)});
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scenario preset_scenario() {
  auto sc = load_preset("paper-s5");
  sc.setup.settings.horizon = {Horizon::Kind::events, static_cast<double>(kPresetEvents)};
  sc.setup.settings.check_invariants = true;
  sc.seeds.clear();
  for (int s = 1; s <= kSeeds; ++s)
    sc.seeds.push_back(static_cast<std::uint64_t>(s));
  return sc;
}

std::vector<RequestRecord> load_trace(const fs::path &dir, const std::string &stem, const TraceNames &names) {
  std::ifstream in(dir / "runs" / (stem + ".trace.csv"), std::ios::binary);
  return read_trace(in, names);
}

// 1
void capacity_invariant(const fs::path &dir, const Scenario &sc) {
  std::uint64_t events = 0, capacity = 0, conservation = 0, regressions = 0;
  std::size_t runs = 0;
  for (auto policy : sc.policies)
    for (auto seed : sc.seeds) {
      const auto stats = json::parse(slurp(dir / "runs" / (run_stem({policy, seed}) + ".stats.json")))["stats"];
      events += stats["events"].get<std::uint64_t>();
      capacity += stats["capacity_violations"].get<std::uint64_t>();
      conservation += stats["conservation_violations"].get<std::uint64_t>();
      regressions += stats["time_regressions"].get<std::uint64_t>();
      ++runs;
    }
  report(1, "capacity invariant", capacity == 0 && conservation == 0 && regressions == 0,
         fmt::format("{} runs x {} request events, {} events checked; capacity violations {}, conservation "
                     "violations {}, time regressions {}",
                     runs, kPresetEvents, events, capacity, conservation, regressions));
}

// 2
void mm1_oracle() {
  const auto sc = load_preset("mm1");
  NeverUpdate never;
  const auto r = simulate(sc.setup, never, 1);
  double sum = 0.0;
  for (const auto &rec : r.trace)
    sum += rec.tau_q + rec.tau_I;
  const double lambda = 1.0 / 350.0, mu = 1.0 / 200.0;
  const double oracle = 1.0 / (mu - lambda);
  const double mean = r.trace.empty() ? 0.0 : sum / static_cast<double>(r.trace.size());
  const double rel = std::abs(mean - oracle) / oracle;
  report(2, "M/M/1 sojourn", r.trace.size() >= kMm1MinRequests && rel <= kMm1RelTol,
         fmt::format("mean {:.3f} ms vs 1/(mu-lambda) = {:.3f} ms, rel err {:.4f} (tol {}), {} requests (min {})",
                     mean, oracle, rel, kMm1RelTol, r.trace.size(), kMm1MinRequests));
}

// 3
void never_exactness(const fs::path &dir, const Scenario &sc) {
  const auto names = TraceNames::from(sc.setup);
  std::size_t records = 0, wrong_version = 0, wrong_stability = 0;
  bool o3_exact = true;
  for (auto seed : sc.seeds) {
    const auto trace = load_trace(dir, run_stem({PolicyKind::never, seed}), names);
    for (const auto &r : trace) {
      ++records;
      wrong_version += r.served_version != VersionId{0};
      wrong_stability += r.stability != sc.setup.models[r.model].stability_start;
    }
    const auto s = objectives(trace, names.app_classes);
    o3_exact = o3_exact && s.overall.mean_stability == 1.0;
    for (const auto &m : s.per_model)
      o3_exact = o3_exact && (m.requests == 0 || m.mean_stability == 1.0);
  }
  report(3, "never-update exactness", records > 0 && wrong_version == 0 && wrong_stability == 0 && o3_exact,
         fmt::format("{} records over {} seeds; served_version != 0: {}; stability != start: {}; O3 == 1 exactly "
                     "overall and per model: {}",
                     records, sc.seeds.size(), wrong_version, wrong_stability, o3_exact ? "yes" : "no"));
}

struct Ci {
  double mean, lower, upper;
};

Ci dapp_ci(const json &summary, const char *policy, const char *metric) {
  const auto &c = summary["policies"][policy]["confidence_intervals"]["dApp"][metric];
  return {c["mean"].get<double>(), c["lower"].get<double>(), c["upper"].get<double>()};
}

// 4
void policy_ordering(const json &summary) {
  struct Cmp {
    const char *metric, *label, *hi, *lo;
  };
  const Cmp cmps[] = {
      {"o2_mean_accuracy", "O2", "always", "load-based"},
      {"o2_mean_accuracy", "O2", "random", "never"},
      {"o3_mean_stability", "O3", "never", "rl"},
      {"o3_mean_stability", "O3", "rl", "always"},
  };
  bool all = true;
  std::vector<std::string> parts;
  for (const auto &c : cmps) {
    const auto a = dapp_ci(summary, c.hi, c.metric), b = dapp_ci(summary, c.lo, c.metric);
    const bool ok = a.mean > b.mean && a.lower > b.upper;
    all = all && ok;
    parts.push_back(fmt::format("{}({})={:.6f} [{:.6f},{:.6f}] > {}({})={:.6f} [{:.6f},{:.6f}] {}", c.label, c.hi,
                                a.mean, a.lower, a.upper, c.label, c.lo, b.mean, b.lower, b.upper,
                                ok ? "ok" : "NOT MET"));
  }
  report(4, "policy ordering (dApp, 98% CI, 10 seeds)", all, fmt::format("{}", fmt::join(parts, "; ")));
}

// 5
void delay_ordering(const json &summary) {
  const double always = summary["policies"]["always"]["delay_ms"]["dApp"]["median"].get<double>();
  const double never = summary["policies"]["never"]["delay_ms"]["dApp"]["median"].get<double>();
  const bool order = always <= never;
  const bool band = never >= kDappBandLow && never <= kDappBandHigh;
  report(5, "dApp delay ordering", order && band,
         fmt::format("median always {:.4f} ms <= never {:.4f} ms: {}; never median within [{}, {}] ms: {}", always,
                     never, order ? "yes" : "no", kDappBandLow, kDappBandHigh, band ? "yes" : "no"));
}

// 6
void epsilon_schedule() {
  auto sc = load_preset("paper-s5");
  sc.setup.settings.horizon = {Horizon::Kind::events, static_cast<double>(kPresetEvents)};
  auto policy = make_policy(PolicyKind::q_learning, sc.setup.settings.policy, 1);
  Simulation sim(sc.setup, *policy, 1);
  const std::uint64_t total = sim.total_events();
  const std::uint64_t half = total / 2;
  const double floor = sc.setup.settings.policy.learning.epsilon_min;
  std::size_t checked = 0, off_schedule = 0, above_floor = 0, increases = 0;
  double at_half = -1.0, prev = 2.0;
  while (true) {
    const std::uint64_t k = sim.stats().request_events;
    if (!sim.step())
      break;
    const double eps = policy->epsilon();
    ++checked;
    off_schedule += eps != epsilon_at(k, total, sc.setup.settings.policy.learning);
    increases += eps > prev;
    prev = eps;
    if (k == half && at_half < 0.0)
      at_half = eps;
    if (k >= half)
      above_floor += eps != floor;
  }
  const bool ok = std::abs(at_half - floor) <= kEpsilonTol && above_floor == 0 && off_schedule == 0 && increases == 0;
  report(6, "epsilon schedule", ok,
         fmt::format("scheduled {} events; epsilon at event {} = {} (target {} +/- {}); events >= half not at floor: "
                     "{}; off-schedule {}; increases {} over {} steps",
                     total, half, at_half, floor, kEpsilonTol, above_floor, off_schedule, increases, checked));
}

// 7
void reward_arithmetic(const fs::path &dir, const Scenario &sc) {
  const auto names = TraceNames::from(sc.setup);
  const auto &p = sc.setup.settings.policy;
  Rng pick(2024);
  const std::size_t per_seed = kRewardSamples / sc.seeds.size();
  std::size_t sampled = 0, reward_mismatch = 0, q_mismatch = 0, missing = 0;
  for (auto seed : sc.seeds) {
    const auto stem = run_stem({PolicyKind::q_learning, seed});
    std::ifstream log_in(dir / "runs" / (stem + ".decisions.csv"), std::ios::binary);
    auto log = read_decision_log(log_in, names);
    std::erase_if(log, [](const DecisionLogEntry &e) { return !e.closed; });
    // Partial Fisher-Yates for a sample without replacement.
    const std::size_t n = std::min(per_seed, log.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(pick.uniform() * static_cast<double>(log.size() - i));
      std::swap(log[i], log[j]);
    }
    log.resize(n);
    std::unordered_map<RequestId, const DecisionLogEntry *> wanted;
    for (const auto &e : log)
      wanted.emplace(e.record, &e);

    std::ifstream trace_in(dir / "runs" / (stem + ".trace.csv"), std::ios::binary);
    std::size_t found = 0;
    read_trace(trace_in, names, [&](const RequestRecord &r) {
      auto it = wanted.find(r.id);
      if (it == wanted.end())
        return;
      ++found;
      const auto &e = *it->second;
      const auto &w = p.weights;
      const double psi = r.total / sc.setup.models[r.model].delay_budget_ms;
      const double sigma = 1.0 - r.stability;
      const double upsilon = r.accuracy;
      const double want_r = -(1.0 - w.alpha) * (w.w1 * psi + w.w2 * sigma) + w.alpha * w.w3 * upsilon;
      reward_mismatch += !same_bits(want_r, e.reward);
      const double lr = p.learning.learning_rate, gamma = p.learning.discount;
      const double want_q = e.q.q_before + lr * (e.reward + gamma * e.q.max_next - e.q.q_before);
      q_mismatch += !same_bits(want_q, e.q.q_after);
    });
    missing += n - found;
    sampled += n;
  }
  report(7, "reward and Q arithmetic", sampled >= kRewardSamples && reward_mismatch == 0 && q_mismatch == 0 &&
                                           missing == 0,
         fmt::format("{} closed decisions sampled (min {}); reward mismatches {}; Q-update mismatches {}; records "
                     "not found {}",
                     sampled, kRewardSamples, reward_mismatch, q_mismatch, missing));
}

// 8
void greedy_at_accuracy_only() {
  auto sc = load_preset("paper-s5");
  for (auto &n : sc.setup.nodes)
    n.capacity = Capacity::unlimited();
  sc.setup.settings.horizon = {Horizon::Kind::events, static_cast<double>(kPresetEvents)};
  sc.setup.settings.policy.weights.alpha = 1.0;
  QLearningAgent agent(Rng(1).substream("policy"), sc.setup.settings.policy.learning);
  Simulation sim(sc.setup, agent, 1);
  const auto result = sim.run();

  std::set<std::size_t> reachable;
  for (const auto &e : result.log)
    reachable.insert(e.state);
  const auto &enc = sim.encoder();
  std::size_t fresher = 0, keep = 0;
  std::vector<std::string> examples;
  for (std::size_t s = 0; s < enc.state_count(); ++s) {
    const auto st = enc.decode(s);
    if (st.gap_bin == 0 || !reachable.count(s))
      continue;
    ++fresher;
    if (agent.greedy(s) != 1) {
      ++keep;
      if (examples.size() < 3)
        examples.push_back(fmt::format("(load {}, queue {}, model {}, gap {}: Q0={:.6f} Q1={:.6f})", st.load_bin,
                                       st.queue_bin, sc.setup.models[static_cast<std::size_t>(st.model)].id,
                                       st.gap_bin, agent.table().get(s, 0), agent.table().get(s, 1)));
    }
  }
  report(8, "greedy policy at alpha=1, unlimited capacity", fresher > 0 && keep == 0,
         fmt::format("{} reachable states with a fresher version, greedy keeps in {}{}{}", fresher, keep,
                     examples.empty() ? "" : ", e.g. ", fmt::join(examples, " ")));
}

// 9
void determinism(const fs::path &first, const fs::path &second) {
  const auto sc = scenario_from_manifest(first / "manifest.json");
  ExperimentOptions opt;
  opt.out_dir = second;
  opt.overwrite = true;
  const auto rep = run_experiment(sc, opt);
  std::size_t files = 0, differing = 0, absent = 0;
  std::string first_diff;
  for (const auto &entry : fs::recursive_directory_iterator(first)) {
    if (!entry.is_regular_file())
      continue;
    ++files;
    const auto rel = fs::relative(entry.path(), first);
    if (!fs::exists(second / rel)) {
      ++absent;
      continue;
    }
    if (slurp(entry.path()) != slurp(second / rel)) {
      ++differing;
      if (first_diff.empty())
        first_diff = rel.string();
    }
  }
  report(9, "determinism from manifest", rep.failures.empty() && files > 0 && differing == 0 && absent == 0,
         fmt::format("{} files compared (traces, logs, stats, Q-tables, summaries); differing {}{}; missing {}", files,
                     differing, first_diff.empty() ? "" : " (first: " + first_diff + ")", absent));
}

// 10
void attribute_endpoints() {
  // Published model table: service time, accuracy and stability ranges.
  struct Row {
    const char *id;
    double st0, st1, acc0, acc1, stab0, stab1;
  };
  const Row table[] = {
      {"ML-d1", 2, 0.5, 0.7, 1.0, 1.0, 0.7},       {"ML-d2", 4, 0.8, 0.7, 1.0, 1.0, 0.7},
      {"ML-x1", 200, 100, 0.75, 1.0, 1.0, 0.7},    {"ML-x2", 300, 200, 0.75, 1.0, 1.0, 0.7},
      {"ML-r1", 1000, 900, 0.8, 1.0, 1.0, 0.7},    {"ML-r2", 2000, 1800, 0.8, 1.0, 1.0, 0.7},
  };
  const auto models = reference_models();
  auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
  double worst = 0.0;
  std::size_t out_of_range = 0, evaluated = 0;
  CurveSettings geometric, percent;
  percent.mode = CurveMode::percent_step;
  for (const auto &row : table) {
    const auto it = std::find_if(models.begin(), models.end(), [&](const ModelClass &m) { return m.id == row.id; });
    if (it == models.end()) {
      worst = INFINITY;
      continue;
    }
    const auto a0 = attributes_of(*it, VersionId{0}, geometric);
    const auto a1 = attributes_of(*it, VersionId{2000}, geometric);
    for (double e : {rel(a0.mean_service_time_ms, row.st0), rel(a1.mean_service_time_ms, row.st1),
                     rel(a0.accuracy, row.acc0), rel(a1.accuracy, row.acc1), rel(a0.stability, row.stab0),
                     rel(a1.stability, row.stab1)})
      worst = std::max(worst, e);
    for (int v = 0; v <= 2000; ++v) {
      const auto a = attributes_of(*it, VersionId{v}, percent);
      ++evaluated;
      out_of_range += a.accuracy < row.acc0 || a.accuracy > row.acc1 || a.stability > row.stab0 ||
                      a.stability < row.stab1 || a.mean_service_time_ms > row.st0 || a.mean_service_time_ms < row.st1;
    }
  }
  report(10, "attribute endpoints", worst <= kEndpointRelTol && out_of_range == 0,
         fmt::format("geometric worst relative endpoint error {:.3g} (tol {}); percent-step versions outside the "
                     "table ranges: {} of {}",
                     worst, kEndpointRelTol, out_of_range, evaluated));
}

} // namespace

int main(int argc, char **argv) {
  fs::path out = fs::current_path() / "acceptance-out";
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--strict")
      strict = true;
    else if (arg == "--out" && i + 1 < argc)
      out = argv[++i];
    else {
      std::cerr << "usage: acceptance [--out DIR] [--strict]\n";
      return 2;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Scenario sc = preset_scenario();
    const fs::path first = out / "preset", second = out / "preset-rerun";
    std::cout << fmt::format("running preset: {} policies x {} seeds x {} request events into {}\n",
                             sc.policies.size(), sc.seeds.size(), kPresetEvents, first.string())
              << std::flush;
    ExperimentOptions opt;
    opt.out_dir = first;
    opt.overwrite = true;
    opt.parallel = std::max(1u, std::thread::hardware_concurrency());
    const auto rep = run_experiment(sc, opt);
    for (const auto &f : rep.failures)
      std::cout << fmt::format("run {} failed: {}\n", run_stem(f.key), f.message);
    std::cout << fmt::format("preset done in {:.1f} s\n", seconds_since(t0)) << std::flush;
    const auto summary = json::parse(slurp(first / "summary.json"));

    capacity_invariant(first, sc);
    mm1_oracle();
    never_exactness(first, sc);
    policy_ordering(summary);
    delay_ordering(summary);
    epsilon_schedule();
    reward_arithmetic(first, sc);
    greedy_at_accuracy_only();
    determinism(first, second);
    attribute_endpoints();
  } catch (const std::exception &e) {
    std::cout << "acceptance aborted: " << e.what() << "\n";
    return 2;
  }

  const auto passed = std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.pass; });
  std::cout << fmt::format("{} of {} criteria pass ({:.0f} s)\n", passed, verdicts.size(), seconds_since(t0));
  return strict && passed != static_cast<long>(verdicts.size()) ? 1 : 0;
}
