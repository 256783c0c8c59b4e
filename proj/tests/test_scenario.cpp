#include <string>

#include <doctest.h>

#include "oranver/errors.hpp"
#include "oranver/scenario.hpp"

using namespace oranver;

namespace {

bool has(const std::vector<Diagnostic> &diags, Diagnostic::Severity sev, const std::string &path, int line = -1) {
  for (const auto &d : diags)
    if (d.severity == sev && d.path == path && (line < 0 || d.line == line))
      return true;
  return false;
}

std::size_t errors(const std::vector<Diagnostic> &diags) {
  std::size_t n = 0;
  for (const auto &d : diags)
    n += d.severity == Diagnostic::Severity::error;
  return n;
}

const char *kSmall = R"(name: small
topology:
  nodes:
    - {id: edge-a, layer: edge, cpu: 8, ram: 16, disk: 100, transmission_delay_ms: 2}
    - {id: cloud, layer: central, cpu: unlimited, ram: unlimited, disk: unlimited, transmission_delay_ms: 30}
models:
  - {id: ML-d1}
  - {id: ML-x1, spawn_time_ms: 150}
run:
  seeds: [4, 9]
  time_ms: 60000
)";

} // namespace

TEST_CASE("bundled presets validate cleanly") {
  for (const auto &name : preset_names()) {
    CAPTURE(name);
    CHECK(errors(validate_scenario(preset_text(name))) == 0);
    CHECK_NOTHROW(load_preset(name));
  }
  CHECK_THROWS_AS(preset_text("nope"), InvalidScenario);
}

TEST_CASE("the reference preset describes the reference deployment") {
  const auto sc = load_preset("paper-s5");
  CHECK(sc.app_hosts.size() == 2);
  REQUIRE(sc.setup.nodes.size() == 4);
  CHECK(sc.setup.nodes[0].layer == Layer::edge);
  CHECK(sc.setup.nodes[0].capacity == Capacity::finite(32, 32.0, 512.0));
  CHECK(sc.setup.nodes[1].capacity == Capacity::finite(32, 32.0, 512.0));
  CHECK(sc.setup.nodes[2].layer == Layer::regional);
  CHECK(sc.setup.nodes[2].capacity == Capacity::unlimited());
  CHECK(sc.setup.nodes[3].layer == Layer::central);
  CHECK(sc.setup.nodes[3].capacity == Capacity::unlimited());
  CHECK(sc.setup.models.size() == 6);
  CHECK(sc.policies == all_policy_kinds());
  CHECK(sc.seeds.size() == 10);
  CHECK(sc.setup.settings.horizon.kind == Horizon::Kind::events);
  CHECK(sc.setup.settings.horizon.value == 1e6);
  const auto &p = sc.setup.settings.policy;
  CHECK(p.load_threshold == 0.5);
  CHECK(p.weights.w1 == 0.025);
  CHECK(p.weights.w2 == 1.0);
  CHECK(p.weights.w3 == 2.0);
  CHECK(p.learning.learning_rate == 0.01);
  CHECK(p.learning.discount == 0.99);
  CHECK(p.learning.epsilon_min == 0.001);
}

TEST_CASE("partial scenarios take reference defaults") {
  const auto sc = parse_scenario(kSmall, "small.yaml");
  CHECK(sc.name == "small");
  CHECK(sc.seeds == std::vector<std::uint64_t>{4, 9});
  CHECK(sc.policies == all_policy_kinds());
  CHECK(sc.setup.models[1].spawn_time_ms == 150.0);
  CHECK(sc.setup.models[1].footprint.cpu == 16);
  CHECK(sc.setup.settings.horizon.kind == Horizon::Kind::time_ms);
  CHECK(sc.setup.nodes[1].transmission_delay_ms == 30.0);
}

TEST_CASE("dump and parse round-trip") {
  for (const auto &name : preset_names()) {
    const auto sc = load_preset(name);
    const auto text = dump_scenario(sc);
    CHECK(dump_scenario(parse_scenario(text)) == text);
  }
  const auto small = parse_scenario(kSmall);
  CHECK(dump_scenario(parse_scenario(dump_scenario(small))) == dump_scenario(small));
}

TEST_CASE("negative capacity names the field and line") {
  std::string text = kSmall;
  text.replace(text.find("cpu: 8"), 6, "cpu: -8");
  const auto diags = validate_scenario(text);
  CHECK(has(diags, Diagnostic::Severity::error, "topology.nodes[0].cpu", 4));
  try {
    parse_scenario(text, "small.yaml");
    FAIL("expected InvalidScenario");
  } catch (const InvalidScenario &e) {
    CHECK(std::string(e.what()).find("small.yaml:4: error: topology.nodes[0].cpu") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  std::string text = kSmall;
  text.insert(text.find("run:"), "scaling: {threshold: 2, cooldown: 5}\n");
  const auto diags = validate_scenario(text);
  CHECK(has(diags, Diagnostic::Severity::error, "scaling.cooldown", 9));
  CHECK_THROWS_AS(parse_scenario(text), InvalidScenario);

  CHECK(has(validate_scenario("name: x\nbogus: 1\n"), Diagnostic::Severity::error, "bogus", 2));
}

TEST_CASE("type and value errors") {
  std::string text = kSmall;
  text.replace(text.find("time_ms: 60000"), 14, "time_ms: soon");
  CHECK(has(validate_scenario(text), Diagnostic::Severity::error, "run.time_ms"));

  const auto bad_policy = validate_scenario("policies: {roster: [always, sometimes]}\n");
  CHECK(has(bad_policy, Diagnostic::Severity::error, "policies.roster[1]", 1));

  const auto custom = validate_scenario("models:\n  - {id: my-model, cpu: 1}\n");
  CHECK(errors(custom) > 0);
  CHECK(errors(validate_scenario("name: [unclosed\n")) > 0);
  CHECK(errors(validate_scenario("policies: {reward: {alpha: 1.5}}\n")) > 0);
}

TEST_CASE("a footprint that fits no enabled node is a warning") {
  const std::string text = R"(topology:
  nodes:
    - {id: edge-a, layer: edge, cpu: 32, ram: 32, disk: 512}
    - {id: cloud, layer: central, cpu: unlimited, ram: unlimited, disk: unlimited, enabled: false}
models:
  - {id: ML-d1}
  - {id: ML-r1}
)";
  const auto diags = validate_scenario(text);
  CHECK(errors(diags) == 0);
  bool warned = false;
  for (const auto &d : diags)
    warned = warned || (d.severity == Diagnostic::Severity::warning &&
                        d.message.find("ML-r1") != std::string::npos);
  CHECK(warned);
  CHECK(parse_scenario(text).setup.nodes.size() == 1);
}

TEST_CASE("diagnostic formatting") {
  Diagnostic d{Diagnostic::Severity::error, 7, "models[2].cpu", "must be >= 0"};
  CHECK(d.format("s.yaml") == "s.yaml:7: error: models[2].cpu: must be >= 0");
  d.line = 0;
  d.severity = Diagnostic::Severity::warning;
  CHECK(d.format("s.yaml") == "s.yaml: warning: models[2].cpu: must be >= 0");
}
