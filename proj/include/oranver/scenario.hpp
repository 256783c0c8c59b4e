#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "oranver/simulator.hpp"

namespace oranver {

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  int line = 0; // 1-based; 0 when not tied to a line
  std::string path;
  std::string message;

  std::string format(std::string_view source) const;
};

// Worker nodes that host RIC applications rather than inference replicas.
// They are part of the declared topology but never receive placements.
struct AppHostNode {
  std::string id;
  Layer layer = Layer::edge;
  Capacity capacity;
};

struct Scenario {
  std::string name;
  SimulationSetup setup;
  std::vector<AppHostNode> app_hosts;
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds;
};

// Parses and validates a YAML scenario. Throws InvalidScenario whose message
// lists every error diagnostic as "source:line: path: message".
Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");

// Full schema and semantic check; never throws on bad input.
std::vector<Diagnostic> validate_scenario(std::string_view text);

// Canonical YAML with every field explicit; parse_scenario(dump) == scenario.
std::string dump_scenario(const Scenario &scenario);

std::vector<std::string> preset_names();
// Embedded scenario text; throws InvalidScenario for unknown names.
std::string preset_text(std::string_view name);
Scenario load_preset(std::string_view name);

} // namespace oranver
