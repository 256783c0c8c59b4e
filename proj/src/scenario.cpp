#include "oranver/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "oranver/errors.hpp"

namespace oranver {

std::string Diagnostic::format(std::string_view source) const {
  const char *sev = severity == Severity::error ? "error" : "warning";
  if (line > 0)
    return fmt::format("{}:{}: {}: {}: {}", source, line, sev, path, message);
  return fmt::format("{}: {}: {}: {}", source, sev, path, message);
}

namespace {

std::string join_path(const std::string &base, std::string_view key) {
  return base.empty() ? std::string(key) : fmt::format("{}.{}", base, key);
}

std::string index_path(const std::string &base, std::size_t i) { return fmt::format("{}[{}]", base, i); }

// Collects diagnostics while walking the document; every accessor records a
// problem instead of throwing so one pass reports everything.
class Reader {
public:
  std::vector<Diagnostic> diags;

  void error(const YAML::Node &at, const std::string &path, std::string message) {
    diags.push_back({Diagnostic::Severity::error, line_of(at), path, std::move(message)});
  }
  void warning(const YAML::Node &at, const std::string &path, std::string message) {
    diags.push_back({Diagnostic::Severity::warning, line_of(at), path, std::move(message)});
  }

  static int line_of(const YAML::Node &n) {
    if (!n.IsDefined())
      return 0;
    const auto mark = n.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
  }

  bool expect_map(const YAML::Node &n, const std::string &path) {
    if (n.IsMap())
      return true;
    error(n, path, "expected a mapping");
    return false;
  }

  void check_keys(const YAML::Node &map, const std::string &path, std::initializer_list<std::string_view> allowed) {
    for (const auto &kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        error(kv.first, join_path(path, key), "unknown key");
    }
  }

  template <class T> std::optional<T> get(const YAML::Node &map, const std::string &path, const char *key) {
    const YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull())
      return std::nullopt;
    try {
      return n.as<T>();
    } catch (const YAML::Exception &) {
      error(n, join_path(path, key), fmt::format("cannot read '{}' as {}", n.Scalar(), type_name<T>()));
      return std::nullopt;
    }
  }

  template <class T> void read(const YAML::Node &map, const std::string &path, const char *key, T &out) {
    if (auto v = get<T>(map, path, key))
      out = *v;
  }

  // Non-negative number or the literal "unlimited".
  template <class T>
  void read_capacity(const YAML::Node &map, const std::string &path, const char *key, std::optional<T> &out) {
    const YAML::Node n = map[key];
    if (!n.IsDefined()) {
      error(map, join_path(path, key), "missing capacity (number or 'unlimited')");
      return;
    }
    if (n.IsScalar() && n.Scalar() == "unlimited") {
      out.reset();
      return;
    }
    if (auto v = get<T>(map, path, key)) {
      if (*v < 0)
        error(n, join_path(path, key), "capacity must be non-negative");
      out = *v;
    }
  }

private:
  template <class T> static const char *type_name() {
    if constexpr (std::is_same_v<T, bool>)
      return "a boolean";
    else if constexpr (std::is_integral_v<T>)
      return "an integer";
    else if constexpr (std::is_floating_point_v<T>)
      return "a number";
    else
      return "a string";
  }
};

template <class E, class F>
void read_enum(Reader &rd, const YAML::Node &map, const std::string &path, const char *key, E &out, F parse) {
  if (auto s = rd.get<std::string>(map, path, key)) {
    try {
      out = parse(*s);
    } catch (const ParseError &e) {
      rd.error(map[key], join_path(path, key), e.what());
    }
  }
}

ReleaseSchedule::Mode release_mode_from_string(std::string_view s) {
  if (s == "periodic")
    return ReleaseSchedule::Mode::periodic;
  if (s == "poisson")
    return ReleaseSchedule::Mode::poisson;
  throw ParseError(fmt::format("unknown release mode '{}'", s));
}

UpdateTarget update_target_from_string(std::string_view s) {
  if (s == "latest")
    return UpdateTarget::latest;
  if (s == "successor")
    return UpdateTarget::successor;
  throw ParseError(fmt::format("unknown update target '{}'", s));
}

NeverSpawnVersion never_spawn_from_string(std::string_view s) {
  if (s == "zero")
    return NeverSpawnVersion::zero;
  if (s == "production")
    return NeverSpawnVersion::production;
  throw ParseError(fmt::format("unknown never_spawn_version '{}'", s));
}

void parse_topology(Reader &rd, const YAML::Node &topo, Scenario &sc) {
  const std::string path = "topology";
  if (!rd.expect_map(topo, path))
    return;
  rd.check_keys(topo, path, {"nodes"});
  const YAML::Node nodes = topo["nodes"];
  if (!nodes.IsSequence()) {
    rd.error(topo, "topology.nodes", "expected a list of nodes");
    return;
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const YAML::Node n = nodes[i];
    const std::string np = index_path("topology.nodes", i);
    if (!rd.expect_map(n, np))
      continue;
    rd.check_keys(n, np, {"id", "layer", "role", "cpu", "ram", "disk", "transmission_delay_ms", "enabled"});
    WorkerNode node;
    if (auto id = rd.get<std::string>(n, np, "id"))
      node.id = *id;
    else
      rd.error(n, join_path(np, "id"), "missing node id");
    if (!node.id.empty() && !ids.insert(node.id).second)
      rd.error(n["id"], join_path(np, "id"), fmt::format("duplicate node id '{}'", node.id));
    read_enum(rd, n, np, "layer", node.layer, layer_from_string);
    std::string role = "inference";
    rd.read(n, np, "role", role);
    rd.read_capacity(n, np, "cpu", node.capacity.cpu);
    rd.read_capacity(n, np, "ram", node.capacity.ram);
    rd.read_capacity(n, np, "disk", node.capacity.disk);
    rd.read(n, np, "transmission_delay_ms", node.transmission_delay_ms);
    if (!(node.transmission_delay_ms >= 0.0))
      rd.error(n["transmission_delay_ms"], join_path(np, "transmission_delay_ms"), "must be >= 0");
    bool enabled = true;
    rd.read(n, np, "enabled", enabled);
    if (role == "app-host") {
      sc.app_hosts.push_back({node.id, node.layer, node.capacity});
    } else if (role != "inference") {
      rd.error(n["role"], join_path(np, "role"), fmt::format("unknown role '{}' (inference | app-host)", role));
    } else if (enabled) {
      sc.setup.nodes.push_back(std::move(node));
    }
  }
}

void parse_models(Reader &rd, const YAML::Node &models, Scenario &sc, std::vector<int> &model_lines) {
  if (!models.IsSequence()) {
    rd.error(models, "models", "expected a list of models");
    return;
  }
  const auto reference = reference_models();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const YAML::Node n = models[i];
    const std::string mp = index_path("models", i);
    if (!rd.expect_map(n, mp))
      continue;
    rd.check_keys(n, mp,
                  {"id", "app_class", "mean_interarrival_ms", "spawn_time_ms", "cpu", "ram", "disk",
                   "service_time_start_ms", "service_time_end_ms", "accuracy_start", "accuracy_end",
                   "stability_start", "stability_end", "processing_delay_ms", "delay_budget_ms",
                   "footprint_overrides"});
    ModelClass m;
    const auto id = rd.get<std::string>(n, mp, "id");
    if (!id) {
      rd.error(n, join_path(mp, "id"), "missing model id");
      continue;
    }
    auto ref = std::find_if(reference.begin(), reference.end(), [&](const ModelClass &r) { return r.id == *id; });
    if (ref != reference.end()) {
      m = *ref;
    } else {
      for (const char *key : {"app_class", "mean_interarrival_ms", "spawn_time_ms", "cpu", "ram", "disk",
                              "service_time_start_ms", "service_time_end_ms", "accuracy_start", "accuracy_end",
                              "stability_start", "stability_end"})
        if (!n[key].IsDefined())
          rd.error(n, join_path(mp, key), fmt::format("required for model '{}' (not a reference model)", *id));
    }
    m.id = *id;
    bool budget_given = n["delay_budget_ms"].IsDefined();
    read_enum(rd, n, mp, "app_class", m.app_class, app_class_from_string);
    if (!budget_given && n["app_class"].IsDefined())
      m.delay_budget_ms = default_delay_budget_ms(m.app_class);
    rd.read(n, mp, "mean_interarrival_ms", m.mean_interarrival_ms);
    rd.read(n, mp, "spawn_time_ms", m.spawn_time_ms);
    rd.read(n, mp, "cpu", m.footprint.cpu);
    rd.read(n, mp, "ram", m.footprint.ram);
    rd.read(n, mp, "disk", m.footprint.disk);
    rd.read(n, mp, "service_time_start_ms", m.service_time_start_ms);
    rd.read(n, mp, "service_time_end_ms", m.service_time_end_ms);
    rd.read(n, mp, "accuracy_start", m.accuracy_start);
    rd.read(n, mp, "accuracy_end", m.accuracy_end);
    rd.read(n, mp, "stability_start", m.stability_start);
    rd.read(n, mp, "stability_end", m.stability_end);
    rd.read(n, mp, "processing_delay_ms", m.processing_delay_ms);
    rd.read(n, mp, "delay_budget_ms", m.delay_budget_ms);
    if (const YAML::Node ov = n["footprint_overrides"]; ov.IsDefined()) {
      if (!ov.IsSequence()) {
        rd.error(ov, join_path(mp, "footprint_overrides"), "expected a list");
      } else {
        for (std::size_t j = 0; j < ov.size(); ++j) {
          const std::string op = index_path(join_path(mp, "footprint_overrides"), j);
          if (!rd.expect_map(ov[j], op))
            continue;
          rd.check_keys(ov[j], op, {"from_version", "cpu", "ram", "disk"});
          int from = 0;
          ResourceVector fp;
          rd.read(ov[j], op, "from_version", from);
          rd.read(ov[j], op, "cpu", fp.cpu);
          rd.read(ov[j], op, "ram", fp.ram);
          rd.read(ov[j], op, "disk", fp.disk);
          m.footprint_overrides[from] = fp;
        }
      }
    }
    for (auto &problem : validate_model(m))
      rd.error(n, mp, problem);
    if (std::any_of(sc.setup.models.begin(), sc.setup.models.end(),
                    [&](const ModelClass &o) { return o.id == m.id; }))
      rd.error(n["id"], join_path(mp, "id"), fmt::format("duplicate model id '{}'", m.id));
    sc.setup.models.push_back(std::move(m));
    model_lines.push_back(Reader::line_of(n));
  }
}

void parse_versions(Reader &rd, const YAML::Node &v, SimulationSettings &s) {
  const std::string p = "versions";
  if (!rd.expect_map(v, p))
    return;
  rd.check_keys(v, p, {"max_index", "minors_per_major", "curve_mode", "update_target", "percent_steps"});
  rd.read(v, p, "max_index", s.curves.scheme.max_index);
  rd.read(v, p, "minors_per_major", s.curves.scheme.minors_per_major);
  if (s.curves.scheme.max_index < 0)
    rd.error(v["max_index"], join_path(p, "max_index"), "must be >= 0");
  if (s.curves.scheme.minors_per_major <= 0)
    rd.error(v["minors_per_major"], join_path(p, "minors_per_major"), "must be > 0");
  read_enum(rd, v, p, "curve_mode", s.curves.mode, curve_mode_from_string);
  read_enum(rd, v, p, "update_target", s.update_target, update_target_from_string);
  if (const YAML::Node st = v["percent_steps"]; st.IsDefined()) {
    const std::string sp = join_path(p, "percent_steps");
    if (rd.expect_map(st, sp)) {
      rd.check_keys(st, sp,
                    {"major_accuracy", "major_stability", "major_service_time", "minor_accuracy",
                     "minor_stability"});
      auto &steps = s.curves.steps;
      rd.read(st, sp, "major_accuracy", steps.major_accuracy);
      rd.read(st, sp, "major_stability", steps.major_stability);
      rd.read(st, sp, "major_service_time", steps.major_service_time);
      rd.read(st, sp, "minor_accuracy", steps.minor_accuracy);
      rd.read(st, sp, "minor_stability", steps.minor_stability);
    }
  }
}

void parse_policies(Reader &rd, const YAML::Node &pn, Scenario &sc) {
  const std::string p = "policies";
  if (!rd.expect_map(pn, p))
    return;
  rd.check_keys(pn, p,
                {"roster", "load_threshold", "random_update_probability", "never_spawn_version", "reward",
                 "q_learning", "state_bins"});
  auto &pp = sc.setup.settings.policy;
  if (const YAML::Node roster = pn["roster"]; roster.IsDefined()) {
    if (!roster.IsSequence()) {
      rd.error(roster, "policies.roster", "expected a list of policy names");
    } else {
      sc.policies.clear();
      for (std::size_t i = 0; i < roster.size(); ++i) {
        try {
          sc.policies.push_back(policy_kind_from_string(roster[i].as<std::string>()));
        } catch (const std::exception &e) {
          rd.error(roster[i], index_path("policies.roster", i), e.what());
        }
      }
    }
  }
  rd.read(pn, p, "load_threshold", pp.load_threshold);
  rd.read(pn, p, "random_update_probability", pp.random_update_probability);
  if (!(pp.random_update_probability >= 0.0 && pp.random_update_probability <= 1.0))
    rd.error(pn["random_update_probability"], "policies.random_update_probability", "must lie in [0, 1]");
  read_enum(rd, pn, p, "never_spawn_version", pp.never_spawn, never_spawn_from_string);

  if (const YAML::Node r = pn["reward"]; r.IsDefined()) {
    const std::string rp = "policies.reward";
    if (rd.expect_map(r, rp)) {
      rd.check_keys(r, rp, {"w1", "w2", "w3", "alpha"});
      rd.read(r, rp, "w1", pp.weights.w1);
      rd.read(r, rp, "w2", pp.weights.w2);
      rd.read(r, rp, "w3", pp.weights.w3);
      rd.read(r, rp, "alpha", pp.weights.alpha);
      const auto &w = pp.weights;
      if (w.w1 < 0 || w.w2 < 0 || w.w3 < 0)
        rd.error(r, rp, "weights must be >= 0");
      if (!(w.alpha >= 0 && w.alpha <= 1))
        rd.error(r["alpha"], join_path(rp, "alpha"), "must lie in [0, 1]");
    }
  }
  if (const YAML::Node q = pn["q_learning"]; q.IsDefined()) {
    const std::string qp = "policies.q_learning";
    if (rd.expect_map(q, qp)) {
      rd.check_keys(q, qp,
                    {"learning_rate", "discount", "epsilon_start", "epsilon_min", "decay_fraction",
                     "learn_from_keeps"});
      auto &l = pp.learning;
      rd.read(q, qp, "learning_rate", l.learning_rate);
      rd.read(q, qp, "discount", l.discount);
      rd.read(q, qp, "epsilon_start", l.epsilon_start);
      rd.read(q, qp, "epsilon_min", l.epsilon_min);
      rd.read(q, qp, "decay_fraction", l.decay_fraction);
      rd.read(q, qp, "learn_from_keeps", l.learn_from_keeps);
    }
  }
  if (const YAML::Node b = pn["state_bins"]; b.IsDefined()) {
    const std::string bp = "policies.state_bins";
    if (rd.expect_map(b, bp)) {
      rd.check_keys(b, bp, {"load_levels", "queue_upper", "gap_cap"});
      auto &bins = pp.bins;
      rd.read(b, bp, "load_levels", bins.load_levels);
      rd.read(b, bp, "gap_cap", bins.gap_cap);
      if (auto qu = rd.get<std::vector<int>>(b, bp, "queue_upper"))
        bins.queue_upper = *qu;
      if (bins.load_levels < 1)
        rd.error(b["load_levels"], join_path(bp, "load_levels"), "must be >= 1");
      if (bins.gap_cap < 0)
        rd.error(b["gap_cap"], join_path(bp, "gap_cap"), "must be >= 0");
      if (!std::is_sorted(bins.queue_upper.begin(), bins.queue_upper.end()))
        rd.error(b["queue_upper"], join_path(bp, "queue_upper"), "must be ascending");
    }
  }
}

void parse_run(Reader &rd, const YAML::Node &r, Scenario &sc) {
  const std::string p = "run";
  if (!rd.expect_map(r, p))
    return;
  rd.check_keys(r, p, {"seeds", "events", "time_ms", "check_invariants"});
  auto &h = sc.setup.settings.horizon;
  if (r["events"].IsDefined() && r["time_ms"].IsDefined())
    rd.error(r, p, "give either events or time_ms, not both");
  if (auto ev = rd.get<double>(r, p, "events")) {
    h = {Horizon::Kind::events, *ev};
    if (*ev <= 0 || std::floor(*ev) != *ev)
      rd.error(r["events"], "run.events", "must be a positive whole number");
  }
  if (auto t = rd.get<double>(r, p, "time_ms")) {
    h = {Horizon::Kind::time_ms, *t};
    if (!(*t > 0))
      rd.error(r["time_ms"], "run.time_ms", "must be > 0");
  }
  rd.read(r, p, "check_invariants", sc.setup.settings.check_invariants);
  if (const YAML::Node s = r["seeds"]; s.IsDefined()) {
    if (s.IsSequence()) {
      if (auto list = rd.get<std::vector<std::uint64_t>>(r, p, "seeds"))
        sc.seeds = *list;
    } else if (auto count = rd.get<int>(r, p, "seeds")) {
      if (*count < 1)
        rd.error(s, "run.seeds", "seed count must be >= 1");
      sc.seeds.clear();
      for (int i = 1; i <= *count; ++i)
        sc.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (sc.seeds.empty())
      rd.error(s, "run.seeds", "at least one seed is required");
  }
}

struct Parsed {
  Scenario scenario;
  std::vector<Diagnostic> diags;
};

Parsed parse_impl(std::string_view text) {
  Parsed out;
  Reader rd;
  Scenario &sc = out.scenario;
  sc.policies = all_policy_kinds();
  sc.seeds = {1};
  sc.setup.models = reference_models();

  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException &e) {
    out.diags.push_back({Diagnostic::Severity::error, e.mark.line + 1, "<document>", e.msg});
    return out;
  }
  if (!root.IsMap()) {
    out.diags.push_back({Diagnostic::Severity::error, 1, "<document>", "scenario must be a mapping"});
    return out;
  }
  rd.check_keys(root, "", {"name", "topology", "models", "versions", "releases", "scaling", "policies", "run"});
  rd.read(root, "", "name", sc.name);

  if (root["topology"].IsDefined())
    parse_topology(rd, root["topology"], sc);
  else
    rd.error(root, "topology", "missing topology");

  std::vector<int> model_lines(sc.setup.models.size(), 0);
  if (root["models"].IsDefined()) {
    sc.setup.models.clear();
    model_lines.clear();
    parse_models(rd, root["models"], sc, model_lines);
  }
  auto &s = sc.setup.settings;
  if (root["versions"].IsDefined())
    parse_versions(rd, root["versions"], s);
  if (const YAML::Node rel = root["releases"]; rel.IsDefined() && rd.expect_map(rel, "releases")) {
    rd.check_keys(rel, "releases", {"mode", "mean_interrelease_ms"});
    read_enum(rd, rel, "releases", "mode", s.release.mode, release_mode_from_string);
    rd.read(rel, "releases", "mean_interrelease_ms", s.release.mean_interrelease_ms);
    if (s.release.mean_interrelease_ms < 0)
      rd.error(rel["mean_interrelease_ms"], "releases.mean_interrelease_ms", "must be >= 0 (0 = derive from horizon)");
  }
  if (const YAML::Node sn = root["scaling"]; sn.IsDefined() && rd.expect_map(sn, "scaling")) {
    rd.check_keys(sn, "scaling", {"threshold"});
    rd.read(sn, "scaling", "threshold", s.scale_threshold);
    if (!(s.scale_threshold > 0))
      rd.error(sn["threshold"], "scaling.threshold", "must be > 0");
  }
  if (root["policies"].IsDefined())
    parse_policies(rd, root["policies"], sc);
  if (root["run"].IsDefined())
    parse_run(rd, root["run"], sc);

  const bool clean = std::none_of(rd.diags.begin(), rd.diags.end(),
                                  [](const Diagnostic &d) { return d.severity == Diagnostic::Severity::error; });
  if (clean) {
    // Cross-field checks the per-section readers cannot see.
    for (const auto &problem : validate_setup(sc.setup))
      rd.error(root, "<scenario>", problem);
    for (std::size_t k = 0; k < sc.setup.models.size(); ++k) {
      const auto &m = sc.setup.models[k];
      const bool fits = std::any_of(sc.setup.nodes.begin(), sc.setup.nodes.end(), [&](const WorkerNode &n) {
        return n.capacity.fits(m.footprint);
      });
      if (!fits)
        rd.diags.push_back({Diagnostic::Severity::warning, k < model_lines.size() ? model_lines[k] : 0,
                            fmt::format("models[{}]", k),
                            fmt::format("footprint of {} (cpu={}, ram={}, disk={}) fits no enabled node", m.id,
                                        m.footprint.cpu, m.footprint.ram, m.footprint.disk)});
    }
    if (sc.setup.nodes.empty() && !sc.setup.models.empty())
      rd.error(root["topology"], "topology.nodes", "no enabled inference node");
  }
  out.diags = std::move(rd.diags);
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }

void emit_capacity(YAML::Emitter &e, const char *key, const auto &value) {
  e << YAML::Key << key << YAML::Value;
  if (value)
    e << num(static_cast<double>(*value));
  else
    e << "unlimited";
}

} // namespace

Scenario parse_scenario(std::string_view text, std::string_view source) {
  auto parsed = parse_impl(text);
  std::vector<std::string> errors;
  for (const auto &d : parsed.diags)
    if (d.severity == Diagnostic::Severity::error)
      errors.push_back(d.format(source));
  if (!errors.empty())
    throw InvalidScenario(fmt::format("{}", fmt::join(errors, "\n")));
  return std::move(parsed.scenario);
}

std::vector<Diagnostic> validate_scenario(std::string_view text) { return parse_impl(text).diags; }

std::string dump_scenario(const Scenario &sc) {
  const auto &s = sc.setup.settings;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << sc.name;

  e << YAML::Key << "topology" << YAML::Value << YAML::BeginMap << YAML::Key << "nodes" << YAML::Value
    << YAML::BeginSeq;
  for (const auto &h : sc.app_hosts) {
    e << YAML::BeginMap << YAML::Key << "id" << YAML::Value << h.id;
    e << YAML::Key << "layer" << YAML::Value << std::string(to_string(h.layer));
    e << YAML::Key << "role" << YAML::Value << "app-host";
    emit_capacity(e, "cpu", h.capacity.cpu);
    emit_capacity(e, "ram", h.capacity.ram);
    emit_capacity(e, "disk", h.capacity.disk);
    e << YAML::EndMap;
  }
  for (const auto &n : sc.setup.nodes) {
    e << YAML::BeginMap << YAML::Key << "id" << YAML::Value << n.id;
    e << YAML::Key << "layer" << YAML::Value << std::string(to_string(n.layer));
    e << YAML::Key << "role" << YAML::Value << "inference";
    emit_capacity(e, "cpu", n.capacity.cpu);
    emit_capacity(e, "ram", n.capacity.ram);
    emit_capacity(e, "disk", n.capacity.disk);
    e << YAML::Key << "transmission_delay_ms" << YAML::Value << num(n.transmission_delay_ms);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "models" << YAML::Value << YAML::BeginSeq;
  for (const auto &m : sc.setup.models) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << m.id;
    e << YAML::Key << "app_class" << YAML::Value << std::string(to_string(m.app_class));
    e << YAML::Key << "mean_interarrival_ms" << YAML::Value << num(m.mean_interarrival_ms);
    e << YAML::Key << "spawn_time_ms" << YAML::Value << num(m.spawn_time_ms);
    e << YAML::Key << "cpu" << YAML::Value << m.footprint.cpu;
    e << YAML::Key << "ram" << YAML::Value << num(m.footprint.ram);
    e << YAML::Key << "disk" << YAML::Value << num(m.footprint.disk);
    e << YAML::Key << "service_time_start_ms" << YAML::Value << num(m.service_time_start_ms);
    e << YAML::Key << "service_time_end_ms" << YAML::Value << num(m.service_time_end_ms);
    e << YAML::Key << "accuracy_start" << YAML::Value << num(m.accuracy_start);
    e << YAML::Key << "accuracy_end" << YAML::Value << num(m.accuracy_end);
    e << YAML::Key << "stability_start" << YAML::Value << num(m.stability_start);
    e << YAML::Key << "stability_end" << YAML::Value << num(m.stability_end);
    e << YAML::Key << "processing_delay_ms" << YAML::Value << num(m.processing_delay_ms);
    e << YAML::Key << "delay_budget_ms" << YAML::Value << num(m.delay_budget_ms);
    if (!m.footprint_overrides.empty()) {
      e << YAML::Key << "footprint_overrides" << YAML::Value << YAML::BeginSeq;
      for (const auto &[from, fp] : m.footprint_overrides)
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "from_version" << YAML::Value << from << YAML::Key
          << "cpu" << YAML::Value << fp.cpu << YAML::Key << "ram" << YAML::Value << num(fp.ram) << YAML::Key
          << "disk" << YAML::Value << num(fp.disk) << YAML::EndMap;
      e << YAML::EndSeq;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  const auto &steps = s.curves.steps;
  e << YAML::Key << "versions" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "max_index" << YAML::Value << s.curves.scheme.max_index;
  e << YAML::Key << "minors_per_major" << YAML::Value << s.curves.scheme.minors_per_major;
  e << YAML::Key << "curve_mode" << YAML::Value << std::string(to_string(s.curves.mode));
  e << YAML::Key << "update_target" << YAML::Value
    << (s.update_target == UpdateTarget::latest ? "latest" : "successor");
  e << YAML::Key << "percent_steps" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "major_accuracy" << YAML::Value << num(steps.major_accuracy);
  e << YAML::Key << "major_stability" << YAML::Value << num(steps.major_stability);
  e << YAML::Key << "major_service_time" << YAML::Value << num(steps.major_service_time);
  e << YAML::Key << "minor_accuracy" << YAML::Value << num(steps.minor_accuracy);
  e << YAML::Key << "minor_stability" << YAML::Value << num(steps.minor_stability);
  e << YAML::EndMap << YAML::EndMap;

  e << YAML::Key << "releases" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value
    << (s.release.mode == ReleaseSchedule::Mode::periodic ? "periodic" : "poisson");
  e << YAML::Key << "mean_interrelease_ms" << YAML::Value << num(s.release.mean_interrelease_ms);
  e << YAML::EndMap;

  e << YAML::Key << "scaling" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "threshold" << YAML::Value << num(s.scale_threshold) << YAML::EndMap;

  const auto &pp = s.policy;
  e << YAML::Key << "policies" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "roster" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto k : sc.policies)
    e << std::string(to_string(k));
  e << YAML::EndSeq;
  e << YAML::Key << "load_threshold" << YAML::Value << num(pp.load_threshold);
  e << YAML::Key << "random_update_probability" << YAML::Value << num(pp.random_update_probability);
  e << YAML::Key << "never_spawn_version" << YAML::Value
    << (pp.never_spawn == NeverSpawnVersion::zero ? "zero" : "production");
  e << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "w1" << YAML::Value << num(pp.weights.w1);
  e << YAML::Key << "w2" << YAML::Value << num(pp.weights.w2);
  e << YAML::Key << "w3" << YAML::Value << num(pp.weights.w3);
  e << YAML::Key << "alpha" << YAML::Value << num(pp.weights.alpha);
  e << YAML::EndMap;
  const auto &l = pp.learning;
  e << YAML::Key << "q_learning" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "learning_rate" << YAML::Value << num(l.learning_rate);
  e << YAML::Key << "discount" << YAML::Value << num(l.discount);
  e << YAML::Key << "epsilon_start" << YAML::Value << num(l.epsilon_start);
  e << YAML::Key << "epsilon_min" << YAML::Value << num(l.epsilon_min);
  e << YAML::Key << "decay_fraction" << YAML::Value << num(l.decay_fraction);
  e << YAML::Key << "learn_from_keeps" << YAML::Value << l.learn_from_keeps;
  e << YAML::EndMap;
  e << YAML::Key << "state_bins" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "load_levels" << YAML::Value << pp.bins.load_levels;
  e << YAML::Key << "queue_upper" << YAML::Value << YAML::Flow << pp.bins.queue_upper;
  e << YAML::Key << "gap_cap" << YAML::Value << pp.bins.gap_cap;
  e << YAML::EndMap << YAML::EndMap;

  const auto &h = s.horizon;
  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << sc.seeds;
  if (h.kind == Horizon::Kind::events)
    e << YAML::Key << "events" << YAML::Value << static_cast<std::uint64_t>(h.value);
  else
    e << YAML::Key << "time_ms" << YAML::Value << num(h.value);
  e << YAML::Key << "check_invariants" << YAML::Value << s.check_invariants;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

namespace {

// Edge: two app-host (O-RAN worker) nodes and two 32-CPU / 32-GB inference
// workers. Regional and central clouds: one unlimited inference node each.
// Transmission delays and edge disk size are not given by the reference
// setup; the values below are this preset's choice.
constexpr const char *kReferencePreset = R"(name: paper-s5
topology:
  nodes:
    - {id: oran-worker-1, layer: edge, role: app-host, cpu: 32, ram: 32, disk: 512}
    - {id: oran-worker-2, layer: edge, role: app-host, cpu: 32, ram: 32, disk: 512}
    - {id: edge-ml-1, layer: edge, cpu: 32, ram: 32, disk: 512, transmission_delay_ms: 5}
    - {id: edge-ml-2, layer: edge, cpu: 32, ram: 32, disk: 512, transmission_delay_ms: 5}
    - {id: regional-ml, layer: regional, cpu: unlimited, ram: unlimited, disk: unlimited, transmission_delay_ms: 20}
    - {id: central-ml, layer: central, cpu: unlimited, ram: unlimited, disk: unlimited, transmission_delay_ms: 50}
models:
  - {id: ML-d1}
  - {id: ML-d2}
  - {id: ML-x1}
  - {id: ML-x2}
  - {id: ML-r1}
  - {id: ML-r2}
versions:
  max_index: 2000
  minors_per_major: 200
  curve_mode: geometric
  update_target: latest
releases:
  mode: periodic
  mean_interrelease_ms: 0
scaling:
  threshold: 2.0
policies:
  roster: [always, never, random, load-based, rl]
  load_threshold: 0.5
  random_update_probability: 0.5
  never_spawn_version: zero
  reward: {w1: 0.025, w2: 1, w3: 2, alpha: 0.5}
  q_learning:
    learning_rate: 0.01
    discount: 0.99
    epsilon_start: 1
    epsilon_min: 0.001
    decay_fraction: 0.5
  state_bins: {load_levels: 5, queue_upper: [0, 2, 5, 10], gap_cap: 5}
run:
  seeds: 10
  events: 1000000
)";

// Single exponential server without releases or scaling.
constexpr const char *kMm1Preset = R"(name: mm1
topology:
  nodes:
    - {id: server, layer: edge, cpu: unlimited, ram: unlimited, disk: unlimited, transmission_delay_ms: 0}
models:
  - id: M1
    app_class: xApp
    mean_interarrival_ms: 350
    spawn_time_ms: 0
    cpu: 1
    ram: 1
    disk: 0
    service_time_start_ms: 200
    service_time_end_ms: 200
    accuracy_start: 0.9
    accuracy_end: 0.9
    stability_start: 1
    stability_end: 1
versions: {max_index: 0, minors_per_major: 1}
scaling: {threshold: 1.0e9}
policies:
  roster: [never]
run:
  seeds: 1
  events: 500000
)";

} // namespace

std::vector<std::string> preset_names() { return {"paper-s5", "mm1"}; }

std::string preset_text(std::string_view name) {
  if (name == "paper-s5")
    return kReferencePreset;
  if (name == "mm1")
    return kMm1Preset;
  throw InvalidScenario(fmt::format("unknown preset '{}' (available: {})", name, fmt::join(preset_names(), ", ")));
}

Scenario load_preset(std::string_view name) { return parse_scenario(preset_text(name), fmt::format("preset:{}", name)); }

} // namespace oranver
